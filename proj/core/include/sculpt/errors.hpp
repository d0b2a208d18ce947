#pragma once

#include <stdexcept>
#include <string>

namespace sculpt {

// Error taxonomy shared across the library. The CLI maps these onto exit
// codes (planning failures -> 2, transport failures -> 3, bad config -> 4).

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Perception produced an empty crop: nothing inside the workspace.
struct NoClayObserved : std::runtime_error {
  NoClayObserved() : std::runtime_error("no clay observed") {}
};

// Planner could not produce a placement order (e.g. floating cells).
struct PlanningFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Prompt has no registered template.
struct UnknownShape : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// HTTP / network-level failure talking to an LLM endpoint.
struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Statistic is undefined on the given input (e.g. <2 pairable ratings).
struct UndefinedStatistic : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sculpt
