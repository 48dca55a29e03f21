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

#include "hrforge/parallel.hpp"

#include <cstdlib>
#include <string>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hrforge {
namespace {

int initial_threads() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HRNET_FORGE_THREADS")) {
    try {
      int cap = std::stoi(env);
      if (cap > 0) n = cap;
    } catch (...) {
      // Unparseable values fall back to the hardware default.
    }
  }
  return n > 0 ? n : 1;
}

int& thread_cap() {
  static int cap = [] {
    int n = initial_threads();
#ifdef _OPENMP
    omp_set_num_threads(n);
#endif
    return n;
  }();
  return cap;
}

}  // namespace

int kernel_threads() { return thread_cap(); }

void set_kernel_threads(int n) {
  if (n < 1) n = 1;
  thread_cap() = n;
#ifdef _OPENMP
  omp_set_num_threads(n);
#endif
}

}  // namespace hrforge
