#pragma once

#include <string>
#include <variant>

#include "banditlab/adversary.hpp"

namespace banditlab {

// Stop-anytime player of the special batch identification game.
struct PullBatch {
  int batch = 1;
};
struct StopWith {
  int output = 0;  // 0 or a batch index in [1..k]
};
using SbiAction = std::variant<PullBatch, StopWith>;

// What an identifier learns after pulling a batch. In correct-bit mode
// `correct_side` holds the batch's correct side; in raw-loss mode it is -1
// and only the loss of the pulled side is given.
struct SbiObservation {
  int batch = 0;
  int pulled_side = 0;
  int loss = 0;
  int correct_side = -1;

  int resolved_correct_side() const {
    if (correct_side >= 0) return correct_side;
    return loss == 0 ? pulled_side : 1 - pulled_side;
  }
};

class Identifier {
 public:
  virtual ~Identifier() = default;
  virtual SbiAction decide(const AdviceState& advice) = 0;
  virtual void observe(const SbiObservation& obs) = 0;
  virtual std::string name() const = 0;
};

}  // namespace banditlab
