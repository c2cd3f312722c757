// Copyright 2026 The cpslab Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CPS_ERRORS_HPP
#define CPS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cps {

// Failure classes surfaced by the library. Budget-style conditions
// (stage/precision exhaustion) are recoverable by retrying with a larger
// budget; the rest indicate contract violations by the caller or by a
// supplied oracle.
enum class Errc {
  missing_bound,
  stage_budget_exceeded,
  space_mismatch,
  support_too_large,
  precision_stall,
  unsupported_morphism,
  bad_parameter,
  atomic_measure,
  dyadic_boundary,
  bad_constant,
  unsupported_observable,
  broken_witness_chain,
  precision_exhausted,
  too_large,
  bad_delta,
  bad_alpha,
  bad_ratio,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::missing_bound: return "missing_bound";
    case Errc::stage_budget_exceeded: return "stage_budget_exceeded";
    case Errc::space_mismatch: return "space_mismatch";
    case Errc::support_too_large: return "support_too_large";
    case Errc::precision_stall: return "precision_stall";
    case Errc::unsupported_morphism: return "unsupported_morphism";
    case Errc::bad_parameter: return "bad_parameter";
    case Errc::atomic_measure: return "atomic_measure";
    case Errc::dyadic_boundary: return "dyadic_boundary";
    case Errc::bad_constant: return "bad_constant";
    case Errc::unsupported_observable: return "unsupported_observable";
    case Errc::broken_witness_chain: return "broken_witness_chain";
    case Errc::precision_exhausted: return "precision_exhausted";
    case Errc::too_large: return "too_large";
    case Errc::bad_delta: return "bad_delta";
    case Errc::bad_alpha: return "bad_alpha";
    case Errc::bad_ratio: return "bad_ratio";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const { return code_; }

  // True for conditions that a caller can clear by raising a stage or
  // precision budget.
  bool is_budget() const {
    return code_ == Errc::stage_budget_exceeded ||
           code_ == Errc::precision_stall ||
           code_ == Errc::precision_exhausted;
  }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace cps

#endif  // CPS_ERRORS_HPP
