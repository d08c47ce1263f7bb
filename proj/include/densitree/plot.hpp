#pragma once

#include <filesystem>
#include <string>

namespace densitree {

// Static SVG renderings of a run directory's artifact files.
std::string plot_mode_function(const std::filesystem::path& run_dir);
std::string plot_tree(const std::filesystem::path& run_dir);
std::string plot_scatter_matrix(const std::filesystem::path& run_dir);
std::string plot_dbs(const std::filesystem::path& run_dir);

/// which = 1..4 in the order above.
std::string plot(const std::filesystem::path& run_dir, int which);

}  // namespace densitree
