#pragma once

#include <string>

namespace rtbwt::detail {

// Writes contents to path via a temporary file and rename, so a failure
// partway through never leaves a truncated file at the destination.
void write_file_atomic(const std::string &path, const std::string &contents);

} // namespace rtbwt::detail
