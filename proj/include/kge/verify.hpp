// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "kge/models.hpp"

namespace kge {

enum class VerifyScale { Tiny, Small };

struct PropertyResult {
  std::string property;
  ModelKind kind = ModelKind::DistMult;
  bool pass = false;
  double observed = 0.0;  // worst relative error seen
  double tolerance = 0.0;
  std::string note;
};

/// Runs the oracle suite for all four model kinds: the loss split identity
/// (naive full loss vs positive + all-pairs + constant), the squared-score
/// expansion identity, and the analytic-vs-finite-difference gradient check.
/// The term provider hook lets tests verify that an injected expansion error
/// is detected.
std::vector<PropertyResult> verify_properties(VerifyScale scale, std::uint64_t seed,
                                              TermProvider terms = &square_terms);

}  // namespace kge
