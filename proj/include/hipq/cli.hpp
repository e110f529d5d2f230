// Copyright 2026-present the hipq project
//
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

#pragma once

#include <iosfwd>

namespace hipq {

// Full command-line surface (train / encode / search / eval /
// export-hierarchy) as a callable function so tests can drive it
// in-process. Returns the process exit code:
//   0 success, 1 usage error, 2 data/format error, 3 numerical failure.
// Output that would go to stdout is written to `out`.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Convenience overload using std::cout / std::cerr.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace hipq
