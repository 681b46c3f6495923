#pragma once

#include "cglasso/model_core.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cglasso {

// CSV layout:
//
//   # free-form comment lines (ignored)
//   name1,name2,...,nameP
//   #lower,l1,...,lP          (optional; -Inf allowed)
//   #upper,u1,...,uP          (optional; Inf allowed)
//   x11,x12,...,x1P
//   ...
//
// Cells censored on the column's default side are written as NA; a cell
// censored on the other side uses NA- (left) or NA+ (right). On input, NA is
// resolved through the per-column side (user flag or default rule).

struct CsvReadOptions {
  /// Overrides for the #lower/#upper rows; a single value broadcasts.
  std::optional<std::vector<double>> lower;
  std::optional<std::vector<double>> upper;
  /// Censoring side of NA cells, per column or a single broadcast value.
  std::vector<Censor> na_side;
};

CensoredDataset read_dataset_csv(std::istream& in, const CsvReadOptions& options = {});
CensoredDataset read_dataset_csv(const std::string& path, const CsvReadOptions& options = {});

/// Writes with 17 significant digits so that reading back is bit-exact.
/// `comment` (if non-empty) is emitted as a leading "# " line.
void write_dataset_csv(std::ostream& out, const CensoredDataset& data,
                       const std::string& comment = {});
void write_dataset_csv(const std::string& path, const CensoredDataset& data,
                       const std::string& comment = {});

/// Round-trippable text form of a double ("Inf", "-Inf", %.17g otherwise).
std::string format_double(double x);
/// Parses a number, accepting Inf/-Inf/+Inf in any letter case. Throws DataError.
double parse_double(const std::string& token);

/// Splits "a,b,c" into doubles; used for broadcastable bound flags.
std::vector<double> parse_double_list(const std::string& text);

}  // namespace cglasso
