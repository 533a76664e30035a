#include "decopt/data.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "decopt/error.hpp"

namespace decopt {

DataMatrix::DataMatrix(RowMatrix samples) : samples_(std::move(samples)) {
  if (!samples_.allFinite()) throw InvariantViolation("data matrix: non-finite entry");
  row_norms_sq_ = samples_.rowwise().squaredNorm();
}

DataMatrix DataMatrix::head(Index count) const {
  if (count < 0 || count > rows())
    throw InvalidDimension(fmt::format("data matrix: cannot take {} of {} rows", count, rows()));
  return DataMatrix(samples_.topRows(count));
}

DataMatrix gen_bernoulli_matrix(Index rows, Index cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw InvalidDimension("bernoulli matrix: rows and cols must be >= 1");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  RowMatrix a(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) a(r, c) = coin(rng) ? 1.0 : -1.0;
  return DataMatrix(std::move(a));
}

namespace {

struct SparseRow {
  std::vector<std::pair<Index, double>> entries;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

SparseRow parse_line(std::string_view line, const std::string& source, long line_no) {
  SparseRow row;
  std::size_t pos = 0;
  bool have_label = false;
  Index last_index = 0;
  while (pos < line.size()) {
    const auto start = line.find_first_not_of(" \t", pos);
    if (start == std::string_view::npos) break;
    auto stop = line.find_first_of(" \t", start);
    if (stop == std::string_view::npos) stop = line.size();
    const std::string_view token = line.substr(start, stop - start);
    pos = stop;

    if (!have_label) {
      double label = 0.0;
      if (!parse_number(token, label))
        throw ParseError(source, line_no, fmt::format("bad label '{}'", token));
      have_label = true;
      continue;
    }
    const auto colon = token.find(':');
    if (colon == std::string_view::npos)
      throw ParseError(source, line_no, fmt::format("expected idx:val, got '{}'", token));
    long long index = 0;
    double value = 0.0;
    if (!parse_number(token.substr(0, colon), index))
      throw ParseError(source, line_no, fmt::format("bad feature index in '{}'", token));
    if (!parse_number(token.substr(colon + 1), value))
      throw ParseError(source, line_no, fmt::format("bad feature value in '{}'", token));
    if (index < 1) throw ParseError(source, line_no, fmt::format("feature index {} is not 1-based", index));
    if (index <= last_index)
      throw ParseError(source, line_no, fmt::format("feature index {} not ascending (after {})", index, last_index));
    last_index = static_cast<Index>(index);
    row.entries.emplace_back(last_index, value);
  }
  return row;
}

}  // namespace

DataMatrix load_libsvm(const std::filesystem::path& path, std::optional<Index> max_rows, std::optional<Index> d_cap) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("libsvm: cannot open '{}'", path.string()));
  if (d_cap && *d_cap < 1) throw InvalidDimension("libsvm: d_cap must be >= 1");
  const std::string source = path.string();

  std::vector<SparseRow> rows;
  Index width = 0;
  std::string line;
  long line_no = 0;
  while ((!max_rows || static_cast<Index>(rows.size()) < *max_rows) && std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    SparseRow row = parse_line(body, source, line_no);
    if (!row.entries.empty()) width = std::max(width, row.entries.back().first);
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError(fmt::format("libsvm: read error on '{}'", source));

  const Index cols = d_cap ? *d_cap : std::max<Index>(width, 1);
  RowMatrix dense = RowMatrix::Zero(static_cast<Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [index, value] : rows[r].entries)
      if (index <= cols) dense(static_cast<Index>(r), index - 1) = value;
  return DataMatrix(std::move(dense));
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                  static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes.data(), bytes.size());
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void save_data_cache(const DataMatrix& data, const std::filesystem::path& path) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (static_cast<std::uint64_t>(data.rows()) > kMax || static_cast<std::uint64_t>(data.cols()) > kMax)
    throw InvalidDimension("data cache: matrix too large for 32-bit header");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("data cache: cannot write '{}'", path.string()));
  put_u32(out, static_cast<std::uint32_t>(data.rows()));
  put_u32(out, static_cast<std::uint32_t>(data.cols()));
  out.write(reinterpret_cast<const char*>(data.samples().data()),
            static_cast<std::streamsize>(sizeof(double) * data.samples().size()));
  if (!out) throw IoError(fmt::format("data cache: write failed on '{}'", path.string()));
}

DataMatrix load_data_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("data cache: cannot open '{}'", path.string()));
  const Index rows = get_u32(in);
  const Index cols = get_u32(in);
  if (!in) throw IoError(fmt::format("data cache: truncated header in '{}'", path.string()));
  RowMatrix samples(rows, cols);
  in.read(reinterpret_cast<char*>(samples.data()), static_cast<std::streamsize>(sizeof(double) * samples.size()));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(double) * samples.size()))
    throw IoError(fmt::format("data cache: truncated payload in '{}'", path.string()));
  return DataMatrix(std::move(samples));
}

}  // namespace decopt
