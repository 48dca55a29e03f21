/* Copyright 2026 The HRForge Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef HRFORGE_PARALLEL_HPP_
#define HRFORGE_PARALLEL_HPP_

#include <cstdint>

namespace hrforge {

// Kernel thread cap. Initialized from HRNET_FORGE_THREADS on first use;
// defaults to the hardware concurrency. Work is only ever split over
// independent output slices, so results do not depend on this value.
int kernel_threads();
void set_kernel_threads(int n);

}  // namespace hrforge

#endif  // HRFORGE_PARALLEL_HPP_
