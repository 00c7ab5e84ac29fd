// Copyright 2026 The xsim Authors. All Rights Reserved.
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

#include <filesystem>
#include <string>
#include <string_view>

namespace xsim {

// Writes `contents` to a sibling temporary file and renames it over `path`,
// so readers never observe a partially written output. Throws IoError.
void atomic_write_file(const std::filesystem::path& path,
                       std::string_view contents);

// Throws IoError when the file cannot be opened or read.
std::string read_file(const std::filesystem::path& path);

}  // namespace xsim
