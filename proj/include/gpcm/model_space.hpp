/*
 * Copyright 2026 the gpcmtest authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace gpcm {

/// Whether a covariance factor is shared across components (E) or free to
/// vary per component (V).
enum class Flag : unsigned char { Equal, Variable };

/// One member of the eigenvalue-decomposed covariance family.  Each component
/// covariance is lambda_j * Gamma_j * Delta_j * Gamma_j', and the three flags
/// say which of volume (lambda), shape (Delta) and orientation (Gamma) are
/// common to all components.
struct ModelId {
  Flag volume = Flag::Equal;
  Flag shape = Flag::Equal;
  Flag orientation = Flag::Equal;

  friend constexpr auto operator<=>(const ModelId&, const ModelId&) = default;

  /// Three-letter code, e.g. "EVE".
  std::string name() const;

  /// Parses a three-letter code (case-insensitive).  Throws InvalidModelError
  /// on anything else.
  static ModelId parse(std::string_view code);

  /// True when every factor of `this` is at least as constrained as the same
  /// factor of `other` (E counts as more constrained than V).
  constexpr bool nested_in(const ModelId& other) const {
    auto le = [](Flag a, Flag b) { return a == Flag::Equal || b == Flag::Variable; };
    return le(volume, other.volume) && le(shape, other.shape) &&
           le(orientation, other.orientation);
  }
};

inline constexpr ModelId kEEE{Flag::Equal, Flag::Equal, Flag::Equal};
inline constexpr ModelId kVEE{Flag::Variable, Flag::Equal, Flag::Equal};
inline constexpr ModelId kEVE{Flag::Equal, Flag::Variable, Flag::Equal};
inline constexpr ModelId kEEV{Flag::Equal, Flag::Equal, Flag::Variable};
inline constexpr ModelId kVVE{Flag::Variable, Flag::Variable, Flag::Equal};
inline constexpr ModelId kVEV{Flag::Variable, Flag::Equal, Flag::Variable};
inline constexpr ModelId kEVV{Flag::Equal, Flag::Variable, Flag::Variable};
inline constexpr ModelId kVVV{Flag::Variable, Flag::Variable, Flag::Variable};

/// The eight models in canonical order (fully constrained first).
inline constexpr std::array<ModelId, 8> kGeneralFamily{kEEE, kVEE, kEVE, kEEV,
                                                       kVVE, kVEV, kEVV, kVVV};

/// Position of `m` within kGeneralFamily.
int family_index(const ModelId& m);

/// Number of free parameters of model `m` with `k` components in dimension
/// `p`: mixing weights, means, and the covariance factors it actually frees.
int total_params(const ModelId& m, int p, int k);

/// Degrees of freedom of the likelihood-ratio test of `m` against the
/// unconstrained VVV model: total_params(VVV) - total_params(m).
int lr_degrees_of_freedom(const ModelId& m, int p, int k);

/// All null hypotheses implied by `m`: every model obtained by tightening
/// one or more of `m`'s V flags to E, plus `m` itself.  VVV is the
/// alternative, never a null, so asking for its implied set throws
/// InvalidModelError.  Result comes back in kGeneralFamily order.
std::vector<ModelId> implied_hypotheses(const ModelId& m);

}  // namespace gpcm
