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

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpcm/closed_test.hpp"
#include "gpcm/criteria.hpp"
#include "gpcm/em.hpp"
#include "gpcm/simulation.hpp"

namespace gpcm {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Hard classification: per-row MAP component (ties to the lowest index).
std::vector<int> map_classification(const Responsibilities& z);

/// Misallocation count against string labels: components are matched to
/// label values by the assignment that maximizes agreement (exhaustive over
/// the smaller side, which is at most the component count).
int misallocation_count(const std::vector<int>& classes, int k,
                        const std::vector<std::string>& labels);

Json fit_report(const FitResult& fit, const std::vector<std::string>& labels);
Json closed_test_report(const ClosedTestReport& report);
Json ic_report(const IcTable& table, int n);
Json sdf_report(const SdfResult& result, const ModelId& model, int n, double overlap, int reps,
                TestMethod method, int R, std::uint64_t seed);

/// Fixed-width text rendering of the closed-test report.
std::string closed_test_table(const ClosedTestReport& report);

}  // namespace gpcm
