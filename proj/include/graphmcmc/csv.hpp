#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace graphmcmc {

/// Shortest decimal string that round-trips the double (printf %.17g).
std::string format_full(double x);

/// Writes header (when nonempty) then one row per matrix row, full precision.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& matrix,
                      const std::vector<std::string>& header);

/// Reads a numeric CSV; a first line with any non-numeric field is treated
/// as a header and skipped. Throws on ragged rows or unparseable fields.
Eigen::MatrixXd read_matrix_csv(const std::string& path);

}  // namespace graphmcmc
