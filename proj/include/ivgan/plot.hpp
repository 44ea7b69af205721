#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ivgan {

// SVG line chart of the named columns against the first column (iter).
// Output depends only on the CSV contents. Throws std::runtime_error listing
// the available columns when one is missing.
void emit_plot(const std::filesystem::path& csv, const std::vector<std::string>& columns,
               const std::filesystem::path& out);

std::string render_plot(const std::string& csv_text, const std::vector<std::string>& columns);

}  // namespace ivgan
