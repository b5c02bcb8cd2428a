/*
 * Copyright (C) 2026 the redmule-sim authors
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

#include <gtest/gtest.h>

#include "redmule/verify.hpp"

TEST(SelfCheck, QuickBatteryPasses) {
    auto results = redmule::run_verification(1, /*quick=*/true);
    ASSERT_EQ(results.size(), 6u);
    for (const auto& r : results) EXPECT_TRUE(r.pass) << r.name << ": " << r.detail;
}
