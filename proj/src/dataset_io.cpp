#include "cglasso/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cglasso {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string lower_case(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Vector broadcast(const std::vector<double>& v, Index p, const char* what) {
  if (v.size() == 1) return Vector::Constant(p, v.front());
  if (static_cast<Index>(v.size()) != p)
    throw DataError(std::string("csv: ") + what + " has " + std::to_string(v.size()) +
                    " entries, expected 1 or " + std::to_string(p));
  return Eigen::Map<const Vector>(v.data(), p);
}

}  // namespace

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& token) {
  const std::string t = lower_case(trim(token));
  if (t == "inf" || t == "+inf") return kInf;
  if (t == "-inf") return -kInf;
  if (t.empty()) throw DataError("csv: empty numeric field");
  double x = 0.0;
  const char* first = t.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), x);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw DataError("csv: cannot parse number '" + token + "'");
  return x;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& f : split_csv(text)) out.push_back(parse_double(f));
  if (out.empty()) throw DataError("empty numeric list");
  return out;
}

CensoredDataset read_dataset_csv(std::istream& in, const CsvReadOptions& options) {
  std::vector<std::string> names;
  std::optional<std::vector<double>> lower_row;
  std::optional<std::vector<double>> upper_row;
  std::vector<std::vector<std::string>> rows;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    const std::string tag = lower_case(fields.front());
    if (tag == "#lower" || tag == "#upper") {
      std::vector<double> v;
      for (std::size_t k = 1; k < fields.size(); ++k) v.push_back(parse_double(fields[k]));
      (tag == "#lower" ? lower_row : upper_row) = std::move(v);
      continue;
    }
    if (!fields.front().empty() && fields.front()[0] == '#') continue;
    if (names.empty()) {
      names = std::move(fields);
      continue;
    }
    if (fields.size() != names.size())
      throw DataError("csv: line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(names.size()));
    rows.push_back(std::move(fields));
  }
  if (names.empty()) throw DataError("csv: missing header row");
  if (rows.empty()) throw DataError("csv: no data rows");

  const Index p = static_cast<Index>(names.size());
  const Index n = static_cast<Index>(rows.size());

  Vector lower = Vector::Constant(p, -kInf);
  Vector upper = Vector::Constant(p, kInf);
  if (lower_row) lower = broadcast(*lower_row, p, "#lower row");
  if (upper_row) upper = broadcast(*upper_row, p, "#upper row");
  if (options.lower) lower = broadcast(*options.lower, p, "lower bound list");
  if (options.upper) upper = broadcast(*options.upper, p, "upper bound list");
  CensoringBounds bounds(lower, upper);

  std::vector<Censor> side(static_cast<std::size_t>(p));
  for (Index h = 0; h < p; ++h) side[static_cast<std::size_t>(h)] = default_na_side(bounds, h);
  if (options.na_side.size() == 1) {
    std::fill(side.begin(), side.end(), options.na_side.front());
  } else if (!options.na_side.empty()) {
    if (static_cast<Index>(options.na_side.size()) != p)
      throw DataError("csv: censoring-side list does not match column count");
    side = options.na_side;
  }

  // Explicit NA-/NA+ cells are placed beyond the matching limit so that
  // encode_censoring classifies them; plain NA uses the column side.
  Matrix raw(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index h = 0; h < p; ++h) {
      const std::string& f = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)];
      if (f == "NA") {
        raw(i, h) = std::numeric_limits<double>::quiet_NaN();
      } else if (f == "NA-" || f == "NA+") {
        const bool left = f == "NA-";
        const double limit = left ? bounds.lower(h) : bounds.upper(h);
        if (!std::isfinite(limit))
          throw DataError("csv: '" + f + "' in column '" + names[static_cast<std::size_t>(h)] +
                          "' whose " + (left ? "lower" : "upper") + " limit is infinite");
        raw(i, h) = left ? -kInf : kInf;
      } else {
        try {
          raw(i, h) = parse_double(f);
        } catch (const DataError&) {
          throw DataError("csv: cannot parse value '" + f + "' at data row " +
                          std::to_string(i + 1) + ", column '" +
                          names[static_cast<std::size_t>(h)] + "'");
        }
        if (!std::isfinite(raw(i, h)))
          throw DataError("csv: non-finite value at data row " + std::to_string(i + 1) +
                          ", column '" + names[static_cast<std::size_t>(h)] + "'");
      }
    }
  }
  return encode_censoring(raw, bounds, side, std::move(names));
}

CensoredDataset read_dataset_csv(const std::string& path, const CsvReadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  return read_dataset_csv(in, options);
}

void write_dataset_csv(std::ostream& out, const CensoredDataset& data, const std::string& comment) {
  const Index p = data.p();
  if (!comment.empty()) out << "# " << comment << "\n";
  for (Index h = 0; h < p; ++h) out << (h ? "," : "") << data.name(h);
  out << "\n#lower";
  for (Index h = 0; h < p; ++h) out << "," << format_double(data.bounds().lower(h));
  out << "\n#upper";
  for (Index h = 0; h < p; ++h) out << "," << format_double(data.bounds().upper(h));
  out << "\n";
  for (Index i = 0; i < data.n(); ++i) {
    for (Index h = 0; h < p; ++h) {
      if (h) out << ",";
      switch (data.status(i, h)) {
        case Censor::Observed: out << format_double(data.value(i, h)); break;
        case Censor::Left:
          out << (default_na_side(data.bounds(), h) == Censor::Left ? "NA" : "NA-");
          break;
        case Censor::Right:
          out << (default_na_side(data.bounds(), h) == Censor::Right ? "NA" : "NA+");
          break;
      }
    }
    out << "\n";
  }
}

void write_dataset_csv(const std::string& path, const CensoredDataset& data,
                       const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file '" + path + "'");
  write_dataset_csv(out, data, comment);
}

}  // namespace cglasso
