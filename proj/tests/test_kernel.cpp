/*
 * Copyright 2026 The mcsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <vector>

#include "mcsim/kernel.hpp"
#include "mcsim/types.hpp"

namespace mcsim {
namespace {

TEST(Kernel, DispatchesInCycleThenInsertionOrder) {
  Kernel k(true);
  std::vector<int> order;
  k.schedule(5, 0, [&] { order.push_back(3); });
  k.schedule(2, 1, [&] { order.push_back(1); });
  k.schedule(5, 2, [&] { order.push_back(4); });
  k.schedule(2, 3, [&] { order.push_back(2); });
  const SimClock c = k.run_until(100);
  EXPECT_EQ(order, (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(c.now, 5u);
  EXPECT_EQ(k.dispatched(), 4u);
  ASSERT_EQ(k.trace().size(), 4u);
  EXPECT_EQ(k.trace()[0].target, 1u);
  EXPECT_EQ(k.trace()[3].target, 2u);
}

TEST(Kernel, EventsScheduledDuringDispatchRunSameCycleAfterPending) {
  Kernel k;
  std::vector<int> order;
  k.schedule(1, 0, [&] {
    order.push_back(1);
    k.schedule(1, 0, [&] { order.push_back(3); });
  });
  k.schedule(1, 0, [&] { order.push_back(2); });
  (void)k.run_until(10);
  EXPECT_EQ(order, (std::vector<int>{1, 2, 3}));
}

TEST(Kernel, SchedulingInThePastThrows) {
  Kernel k;
  k.schedule(10, 0, [] {});
  (void)k.run_until(10);
  EXPECT_THROW(k.schedule(9, 0, [] {}), ConfigError);
  EXPECT_NO_THROW(k.schedule(10, 0, [] {}));
}

TEST(Kernel, RunUntilStopsAtLimitAndResumes) {
  Kernel k;
  int fired = 0;
  for (Cycle c = 1; c <= 10; ++c) k.schedule(c, 0, [&] { ++fired; });
  (void)k.run_until(4);
  EXPECT_EQ(fired, 4);
  EXPECT_EQ(k.pending(), 6u);
  (void)k.run_until(100);
  EXPECT_EQ(fired, 10);
  EXPECT_TRUE(k.empty());
}

TEST(Kernel, StopEndsRunAfterCurrentEvent) {
  Kernel k;
  int fired = 0;
  k.schedule(1, 0, [&] {
    ++fired;
    k.stop();
  });
  k.schedule(1, 0, [&] { ++fired; });
  (void)k.run_until(100);
  EXPECT_EQ(fired, 1);
  EXPECT_EQ(k.pending(), 1u);
}

TEST(Kernel, IdenticalSchedulesGiveIdenticalTraces) {
  auto run = [] {
    Kernel k(true);
    for (int i = 0; i < 50; ++i) k.schedule(static_cast<Cycle>((i * 7) % 13), static_cast<ComponentId>(i), [] {});
    (void)k.run_until(1000);
    return k.trace();
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace mcsim
