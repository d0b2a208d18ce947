#include "sculpt/planner.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <tuple>
#include <utility>

#include <json.hpp>

#include "sculpt/errors.hpp"

namespace sculpt {

namespace {

nlohmann::ordered_json cells_json(const std::vector<CellIndex>& cells) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : cells) arr.push_back({c.i, c.j, c.k});
  return arr;
}

}  // namespace

std::string AuditLog::to_jsonl() const {
  std::ostringstream out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["call_index"] = r.call_index;
    j["proposer"] = r.proposer;
    j["grid"] = r.grid_text;
    if (!r.raw_reply.empty()) j["raw_reply"] = r.raw_reply;
    j["proposal"] = cells_json(r.proposal);
    j["accepted"] = cells_json(r.accepted);
    j["rejections"] = r.rejections;
    if (r.proposer == "theta" || r.proposer == "gamma")
      j["result"] = r.bool_result;
    out << j.dump() << "\n";
  }
  return out.str();
}

PlacementPlan plan(const ShapePrompt& prompt, const ProposerSuite& suite,
                   int max_iters, AuditLog* audit,
                   const std::optional<OccupancyGrid>& initial) {
  if (max_iters < 1) throw InvalidArgument("plan: max_iters must be >= 1");

  OccupancyGrid grid = initial.value_or(OccupancyGrid{});
  std::vector<CellIndex> os;
  for (const auto& c : grid.occupied_cells()) os.push_back(c);

  AuditLog local;
  AuditLog& log = audit ? *audit : local;

  bool no_help_needed = suite.assist(prompt);
  {
    AuditRecord rec;
    rec.proposer = "gamma";
    rec.bool_result = no_help_needed;
    log.records.push_back(rec);
  }
  if (!no_help_needed) {
    OccupancyGrid seeded = suite.shape_gen(prompt);
    AuditRecord rec;
    rec.proposer = "zeta";
    rec.grid_text = seeded.to_text();
    rec.accepted = seeded.occupied_cells();
    log.records.push_back(rec);
    grid = seeded;
    os = grid.occupied_cells();
  }

  int call_index = 0;
  for (int iter = 0; iter < max_iters; ++iter) {
    {
      AuditRecord rec;
      rec.proposer = "theta";
      rec.grid_text = grid.to_text();
      rec.bool_result = suite.terminator(prompt, grid);
      log.records.push_back(rec);
      if (rec.bool_result) break;
    }

    AuditRecord rec;
    rec.call_index = call_index++;
    rec.grid_text = grid.to_text();
    if (iter % 2 == 0) {
      rec.proposer = "sigma";
      rec.proposal = suite.planner(prompt, grid, rec);
      for (const auto& c : rec.proposal) {
        if (!grid.in_range(c)) {
          rec.rejections.push_back("out of range");
          continue;
        }
        if (grid.occupied(c)) {
          rec.rejections.push_back("already occupied");
          continue;
        }
        grid.set(c, true);
        os.push_back(c);
        rec.accepted.push_back(c);
      }
    } else {
      rec.proposer = "phi";
      rec.proposal = suite.remover(prompt, grid, rec);
      for (const auto& c : rec.proposal) {
        if (!grid.in_range(c)) {
          rec.rejections.push_back("out of range");
          continue;
        }
        if (!grid.occupied(c)) {
          rec.rejections.push_back("not occupied");
          continue;
        }
        grid.set(c, false);
        os.erase(std::remove(os.begin(), os.end(), c), os.end());
        rec.accepted.push_back(c);
      }
    }
    log.records.push_back(std::move(rec));
  }

  return validate_and_order(grid, os);
}

PlacementPlan validate_and_order(const OccupancyGrid& grid_final,
                                 const std::vector<CellIndex>& raw_plan) {
  auto occupied = grid_final.occupied_cells();
  {
    auto a = occupied;
    auto b = raw_plan;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b)
      throw InvalidArgument("validate_and_order: plan cells do not match grid");
  }

  std::vector<CellIndex> floating;
  for (const auto& c : occupied)
    if (c.k > 0 && !grid_final.occupied({c.i, c.j, c.k - 1}))
      floating.push_back(c);
  if (!floating.empty()) {
    std::ostringstream msg;
    msg << "unsupported cells:";
    for (const auto& c : floating)
      msg << " (" << c.i << "," << c.j << "," << c.k << ")";
    throw PlanningFailure(msg.str());
  }

  // Layer-by-layer order: every cell follows the one below it and columns
  // fill bottom-up, which satisfies both support and top-down reachability.
  std::sort(occupied.begin(), occupied.end(),
            [](const CellIndex& a, const CellIndex& b) {
              return std::tie(a.k, a.i, a.j) < std::tie(b.k, b.i, b.j);
            });
  PlacementPlan out;
  for (const auto& c : occupied)
    out.placements.push_back({c, grid_final.cell_center(c)});
  return out;
}

namespace {

using CellList = std::vector<CellIndex>;

std::map<std::string, CellList> build_templates() {
  std::map<std::string, CellList> t;
  CellList cells;

  // line: single row at the floor
  cells.clear();
  for (int j = 0; j < 5; ++j) cells.push_back({2, j, 0});
  t["line"] = cells;

  // X: diagonal cross at the floor
  cells.clear();
  for (int i = 0; i < 5; ++i) {
    cells.push_back({i, i, 0});
    if (i != 4 - i) cells.push_back({i, 4 - i, 0});
  }
  t["x"] = cells;

  // column: vertical stack in the center
  cells.clear();
  for (int k = 0; k < 4; ++k) cells.push_back({2, 2, k});
  t["column"] = cells;

  // pyramid: 5x5, 3x3, 1 layers
  cells.clear();
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) cells.push_back({i, j, 0});
  for (int i = 1; i < 4; ++i)
    for (int j = 1; j < 4; ++j) cells.push_back({i, j, 1});
  cells.push_back({2, 2, 2});
  t["pyramid"] = cells;

  // cube: 3x3x3 block
  cells.clear();
  for (int k = 0; k < 3; ++k)
    for (int i = 1; i < 4; ++i)
      for (int j = 1; j < 4; ++j) cells.push_back({i, j, k});
  t["cube"] = cells;

  // flower: petals around a raised center
  cells.clear();
  cells.push_back({2, 2, 0});
  cells.push_back({0, 2, 0});
  cells.push_back({4, 2, 0});
  cells.push_back({2, 0, 0});
  cells.push_back({2, 4, 0});
  cells.push_back({1, 1, 0});
  cells.push_back({1, 3, 0});
  cells.push_back({3, 1, 0});
  cells.push_back({3, 3, 0});
  cells.push_back({2, 2, 1});
  t["flower"] = cells;

  // airplane: fuselage + wings + tail fin
  cells.clear();
  for (int i = 0; i < 5; ++i) cells.push_back({i, 2, 0});
  for (int j = 0; j < 5; ++j)
    if (j != 2) cells.push_back({2, j, 0});
  cells.push_back({0, 2, 1});
  t["airplane"] = cells;

  // chair: four legs, seat, backrest
  cells.clear();
  for (auto [i, j] : {std::pair{1, 1}, {1, 3}, {3, 1}, {3, 3}}) {
    cells.push_back({i, j, 0});
    cells.push_back({i, j, 1});
  }
  cells.push_back({1, 1, 2});
  cells.push_back({1, 3, 2});
  t["chair"] = cells;

  // pottery: hollow ring, two layers
  cells.clear();
  for (int k = 0; k < 2; ++k)
    for (int i = 1; i < 4; ++i)
      for (int j = 1; j < 4; ++j)
        if (!(i == 2 && j == 2)) cells.push_back({i, j, k});
  t["pottery"] = cells;

  return t;
}

const std::map<std::string, CellList>& templates() {
  static const std::map<std::string, CellList> t = build_templates();
  return t;
}

// Shapes routed through the shape generator (the assist predicate reports
// the planner needs help for these).
bool is_complex_shape(const std::string& keyword) {
  return keyword == "flower" || keyword == "airplane" || keyword == "chair" ||
         keyword == "pottery";
}

}  // namespace

std::vector<std::string> known_templates() {
  std::vector<std::string> out;
  for (const auto& [k, v] : templates()) out.push_back(k);
  return out;
}

OccupancyGrid template_grid(const std::string& keyword) {
  auto it = templates().find(keyword);
  if (it == templates().end())
    it = templates().find(resolve_template_keyword(ShapePrompt{keyword}));
  if (it == templates().end()) {
    std::ostringstream msg;
    msg << "unknown shape '" << keyword << "'; known:";
    for (const auto& k : known_templates()) msg << " " << k;
    throw UnknownShape(msg.str());
  }
  OccupancyGrid grid;
  for (const auto& c : it->second) grid.set(c, true);
  return grid;
}

std::string resolve_template_keyword(const ShapePrompt& prompt) {
  // tokenize on non-alphanumerics, lowercase
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : prompt.text) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);

  for (const auto& tok : tokens)
    if (templates().count(tok)) return tok;

  std::ostringstream msg;
  msg << "no registered template in prompt '" << prompt.text << "'; known:";
  for (const auto& k : known_templates()) msg << " " << k;
  throw UnknownShape(msg.str());
}

ProposerSuite template_backend(const ShapePrompt& prompt) {
  const std::string keyword = resolve_template_keyword(prompt);
  ProposerSuite suite;

  suite.planner = [keyword](const ShapePrompt&, const OccupancyGrid& grid,
                            AuditRecord&) {
    std::vector<CellIndex> out;
    OccupancyGrid target = template_grid(keyword);
    for (const auto& c : validate_and_order(target, target.occupied_cells())
                             .placements) {
      if (!grid.occupied(c.cell)) {
        out.push_back(c.cell);
        if (static_cast<int>(out.size()) == kProposalBatchSize) break;
      }
    }
    return out;
  };
  suite.remover = [keyword](const ShapePrompt&, const OccupancyGrid& grid,
                            AuditRecord&) {
    std::vector<CellIndex> out;
    OccupancyGrid target = template_grid(keyword);
    for (const auto& c : grid.occupied_cells()) {
      if (!target.occupied(c)) {
        out.push_back(c);
        if (static_cast<int>(out.size()) == kProposalBatchSize) break;
      }
    }
    // remove top-down so lower cells never orphan the ones above
    std::sort(out.begin(), out.end(), [](const CellIndex& a, const CellIndex& b) {
      return a.k > b.k;
    });
    return out;
  };
  suite.terminator = [keyword](const ShapePrompt&, const OccupancyGrid& grid) {
    return grid == template_grid(keyword);
  };
  suite.assist = [keyword](const ShapePrompt&) { return !is_complex_shape(keyword); };
  suite.shape_gen = [keyword](const ShapePrompt&) { return template_grid(keyword); };
  return suite;
}

PointCloud template_sample_cloud(const std::string& keyword, int points_per_cell) {
  return grid_sample_cloud(template_grid(keyword), points_per_cell);
}

PointCloud grid_sample_cloud(const OccupancyGrid& grid, int points_per_cell) {
  int per_axis = 1;
  while ((per_axis + 1) * (per_axis + 1) * (per_axis + 1) <= points_per_cell)
    ++per_axis;
  PointCloud out;
  for (const auto& c : grid.occupied_cells()) {
    Point3 center = grid.cell_center(c);
    double s = grid.cell_size();
    for (int a = 0; a < per_axis; ++a)
      for (int b = 0; b < per_axis; ++b)
        for (int d = 0; d < per_axis; ++d) {
          auto frac = [&](int v) {
            return per_axis == 1 ? 0.0
                                 : (static_cast<double>(v) / (per_axis - 1) - 0.5);
          };
          out.points.push_back({center.x + frac(a) * s, center.y + frac(b) * s,
                                center.z + frac(d) * s});
        }
  }
  return out;
}

std::string plan_to_json(const PlacementPlan& p, const OccupancyGrid& grid) {
  nlohmann::ordered_json j;
  j["grid"]["dims"] = {grid.dims()[0], grid.dims()[1], grid.dims()[2]};
  j["grid"]["cell_m"] = grid.cell_size();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& pl : p.placements)
    arr.push_back({pl.cell.i, pl.cell.j, pl.cell.k});
  j["placements"] = std::move(arr);
  return j.dump(2);
}

}  // namespace sculpt
