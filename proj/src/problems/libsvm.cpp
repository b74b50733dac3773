#include "avghb/problems/libsvm.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "avghb/error.hpp"

namespace avghb::problems {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_double(std::string_view token, std::size_t line_no, const char* what) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw ParseError(line_no, std::string("malformed ") + what + " '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> dim_override) {
  std::vector<Eigen::Index> row_ptr{0};
  std::vector<Eigen::Index> cols;
  std::vector<double> vals;
  std::vector<double> labels;
  std::size_t max_index = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_tokens(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;

    const double raw_label = parse_double(tokens.front(), line_no, "label");
    if (raw_label == 1.0) {
      labels.push_back(1.0);
    } else if (raw_label == -1.0 || raw_label == 0.0) {
      labels.push_back(-1.0);
    } else {
      throw ParseError(line_no, "unmappable label '" + std::string(tokens.front()) + "'");
    }

    std::size_t prev = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos || colon == 0) {
        throw ParseError(line_no, "malformed feature token '" + std::string(tok) + "'");
      }
      std::size_t index = 0;
      const auto idx_str = tok.substr(0, colon);
      const auto [ptr, ec] = std::from_chars(idx_str.data(), idx_str.data() + idx_str.size(), index);
      if (ec != std::errc() || ptr != idx_str.data() + idx_str.size() || index == 0) {
        throw ParseError(line_no, "malformed feature index '" + std::string(idx_str) + "'");
      }
      if (index <= prev) {
        throw ParseError(line_no, "feature indices must be strictly ascending (" +
                                      std::to_string(index) + " after " + std::to_string(prev) +
                                      ")");
      }
      prev = index;
      cols.push_back(static_cast<Eigen::Index>(index - 1));
      vals.push_back(parse_double(tok.substr(colon + 1), line_no, "feature value"));
      if (index > max_index) max_index = index;
    }
    row_ptr.push_back(static_cast<Eigen::Index>(cols.size()));
  }

  std::size_t d = max_index;
  if (dim_override) {
    if (*dim_override < max_index) {
      throw ParseError(0, "dimension override " + std::to_string(*dim_override) +
                              " is smaller than the largest index " + std::to_string(max_index));
    }
    d = *dim_override;
  }

  const auto m = static_cast<Eigen::Index>(labels.size());
  Dataset out;
  out.features.resize(m, static_cast<Eigen::Index>(d));
  out.features.resizeNonZeros(static_cast<Eigen::Index>(vals.size()));
  std::copy(row_ptr.begin(), row_ptr.end(), out.features.outerIndexPtr());
  std::copy(cols.begin(), cols.end(), out.features.innerIndexPtr());
  std::copy(vals.begin(), vals.end(), out.features.valuePtr());
  out.labels = Eigen::Map<const Vector>(labels.data(), m);
  return out;
}

Dataset parse_libsvm(const std::filesystem::path& path, std::optional<std::size_t> dim_override) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset '" + path.string() + "'");
  return parse_libsvm(in, dim_override);
}

void write_libsvm(const Dataset& data, std::ostream& out) {
  const auto& A = data.features;
  char buf[64];
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    out << (data.labels(i) > 0 ? "+1" : "-1");
    for (SparseRowMatrix::InnerIterator it(A, i); it; ++it) {
      const auto res = std::to_chars(buf, buf + sizeof buf, it.value(),
                                     std::chars_format::general, 17);
      out << ' ' << (it.col() + 1) << ':' << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

}  // namespace avghb::problems
