#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sculpt/occupancy.hpp"

namespace sculpt {

struct ShapePrompt {
  std::string text;
};

// One proposer invocation, kept for the audit trail. `accepted` holds the
// cells that survived validation and mutated the grid.
struct AuditRecord {
  int call_index = -1;          // position among sigma/phi calls (alternation check)
  std::string proposer;         // "sigma", "phi", "theta", "gamma", "zeta"
  std::string grid_text;        // grid state given to the proposer
  std::string raw_reply;        // verbatim backend reply, empty for local backends
  std::vector<CellIndex> proposal;
  std::vector<CellIndex> accepted;
  std::vector<std::string> rejections;
  bool bool_result = false;     // for theta/gamma records
};

struct AuditLog {
  std::vector<AuditRecord> records;
  std::string to_jsonl() const;
};

// The five pluggable proposers of the segment planner. `assist` is the
// "no help needed" predicate: when it returns false the shape generator
// seeds the initial grid.
struct ProposerSuite {
  std::function<std::vector<CellIndex>(const ShapePrompt&, const OccupancyGrid&,
                                       AuditRecord&)> planner;   // sigma: cells to add
  std::function<std::vector<CellIndex>(const ShapePrompt&, const OccupancyGrid&,
                                       AuditRecord&)> remover;   // phi: cells to remove
  std::function<bool(const ShapePrompt&, const OccupancyGrid&)> terminator;  // theta
  std::function<bool(const ShapePrompt&)> assist;                // gamma_a
  std::function<OccupancyGrid(const ShapePrompt&)> shape_gen;    // zeta
};

inline constexpr int kProposalBatchSize = 3;
inline constexpr int kDefaultMaxPlanIters = 50;

// Runs the iterative add/remove loop: even proposer calls add cells, odd
// calls remove them, until the terminator fires or max_iters is reached.
// Invalid proposals are rejected and logged but still consume the iteration.
// The returned plan is ordered to satisfy the support constraints.
PlacementPlan plan(const ShapePrompt& prompt, const ProposerSuite& suite,
                   int max_iters = kDefaultMaxPlanIters,
                   AuditLog* audit = nullptr,
                   const std::optional<OccupancyGrid>& initial = std::nullopt);

// Orders the raw cells bottom-up so that every prefix is supported; throws
// PlanningFailure (naming the cells) when the final grid contains floating
// cells.
PlacementPlan validate_and_order(const OccupancyGrid& grid_final,
                                 const std::vector<CellIndex>& raw_plan);

// Deterministic template stand-in for the LLM/Point-E proposers.
ProposerSuite template_backend(const ShapePrompt& prompt);

// Registered template shapes, and direct access to a template grid.
std::vector<std::string> known_templates();
OccupancyGrid template_grid(const std::string& keyword);

// Resolves the template keyword appearing in a free-text prompt; throws
// UnknownShape (listing known templates) when nothing matches.
std::string resolve_template_keyword(const ShapePrompt& prompt);

// Dense lattice sample of a grid's occupied cells, used as the reference
// surface for heuristic sub-goals and progress metrics.
PointCloud grid_sample_cloud(const OccupancyGrid& grid, int points_per_cell = 27);
PointCloud template_sample_cloud(const std::string& keyword, int points_per_cell = 27);

std::string plan_to_json(const PlacementPlan& p, const OccupancyGrid& grid);

}  // namespace sculpt
