#include "mae/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mae/rng.hpp"

namespace mae {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_label(std::string_view cell, int& out) {
  double v;
  if (!parse_double(cell, v) || v != std::floor(v) || std::abs(v) > 2e9) return false;
  out = static_cast<int>(v);
  return true;
}

DataMatrixd take_columns(const DataMatrixd& data, const std::vector<Index>& columns) {
  DataMatrixd out;
  out.values.resize(data.dim(), static_cast<Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) out.values.col(static_cast<Index>(c)) = data.values.col(columns[c]);
  if (data.labels) {
    std::vector<int> labels(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) labels[c] = (*data.labels)[static_cast<std::size_t>(columns[c])];
    out.labels = std::move(labels);
  }
  return out;
}

}  // namespace

std::vector<Index> FoldPlan::members(int fold) const {
  std::vector<Index> idx;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) idx.push_back(static_cast<Index>(i));
  return idx;
}

DataMatrixd load_csv(std::istream& in, bool has_labels) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t width = 0;
  std::size_t line_no = 0;
  bool first_content = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);
    if (first_content) {
      first_content = false;
      double probe;
      if (!parse_double(cells.front(), probe)) continue;  // header row
    }
    if (width == 0) {
      width = cells.size();
      if (has_labels && width < 2) throw ParseError("labeled CSV needs at least one feature column", line_no);
    } else if (cells.size() != width) {
      throw ParseError("ragged row at line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                           " cells, got " + std::to_string(cells.size()),
                       line_no);
    }
    const std::size_t num_features = has_labels ? width - 1 : width;
    std::vector<double> row(num_features);
    for (std::size_t c = 0; c < num_features; ++c)
      if (!parse_double(cells[c], row[c]))
        throw ParseError("non-numeric cell '" + std::string(cells[c]) + "' at line " + std::to_string(line_no) +
                             ", column " + std::to_string(c + 1),
                         line_no);
    if (has_labels) {
      int label;
      if (!parse_label(cells.back(), label))
        throw ParseError("non-integer label '" + std::string(cells.back()) + "' at line " + std::to_string(line_no),
                         line_no);
      labels.push_back(label);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("CSV contains no data rows");

  DataMatrixd data;
  const auto d = static_cast<Index>(rows.front().size());
  data.values.resize(d, static_cast<Index>(rows.size()));
  for (std::size_t n = 0; n < rows.size(); ++n)
    for (Index f = 0; f < d; ++f) data.values(f, static_cast<Index>(n)) = rows[n][static_cast<std::size_t>(f)];
  if (has_labels) data.labels = std::move(labels);
  return data;
}

DataMatrixd load_csv_file(const std::string& path, bool has_labels) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return load_csv(in, has_labels);
}

void write_csv(const DataMatrixd& data, std::ostream& out) {
  char buf[32];
  for (Index n = 0; n < data.size(); ++n) {
    for (Index f = 0; f < data.dim(); ++f) {
      if (f) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g", data.values(f, n));
      out << buf;
    }
    if (data.labels) out << ',' << (*data.labels)[static_cast<std::size_t>(n)];
    out << '\n';
  }
  if (!out) throw Error("failed to write CSV");
}

DataMatrixd center_features(const DataMatrixd& data) {
  validate(DataMatrixd{data.values, data.labels, std::nullopt});
  const Vec<double> means = data.values.rowwise().mean();
  return apply_centering(data, means);
}

DataMatrixd apply_centering(const DataMatrixd& data, const Vec<double>& means) {
  if (means.size() != data.dim()) throw ShapeError("centering offsets do not match D");
  DataMatrixd out;
  out.values = data.values.colwise() - means;
  out.labels = data.labels;
  out.feature_means = data.feature_means ? Vec<double>(*data.feature_means + means) : means;
  return out;
}

DataMatrixd gaussian_mixture(const MixtureSpec& spec) {
  if (spec.num_clusters < 1 || spec.dim < 1 || spec.num_points < spec.num_clusters || !(spec.cluster_std > 0.0) ||
      !(spec.mean_scale >= 0.0))
    throw ValidationError("invalid mixture spec: need K >= 1, D >= 1, N >= K, std > 0, mean_scale >= 0");
  Rng rng(spec.seed);
  Mat<double> means(spec.dim, spec.num_clusters);
  for (int k = 0; k < spec.num_clusters; ++k)
    for (int f = 0; f < spec.dim; ++f) means(f, k) = spec.mean_scale * rng.normal();

  DataMatrixd data;
  data.values.resize(spec.dim, spec.num_points);
  std::vector<int> labels(static_cast<std::size_t>(spec.num_points));
  for (int n = 0; n < spec.num_points; ++n) {
    const int k = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(spec.num_clusters)));
    labels[static_cast<std::size_t>(n)] = k;
    for (int f = 0; f < spec.dim; ++f) data.values(f, n) = means(f, k) + spec.cluster_std * rng.normal();
  }
  data.labels = std::move(labels);
  return data;
}

FoldPlan make_folds(Index n, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("number of folds must be >= 2");
  if (n < k) throw ValidationError("cannot make " + std::to_string(k) + " folds from " + std::to_string(n) + " examples");
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);
  FoldPlan plan;
  plan.num_folds = k;
  plan.seed = seed;
  plan.assignments.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    plan.assignments[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(k));
  return plan;
}

TrainTestSplit split(const DataMatrixd& data, const FoldPlan& plan, int fold) {
  if (static_cast<Index>(plan.assignments.size()) != data.size()) throw ShapeError("fold plan does not match N");
  if (fold < 0 || fold >= plan.num_folds) throw ValidationError("fold index out of range");
  std::vector<Index> train, test;
  for (std::size_t i = 0; i < plan.assignments.size(); ++i)
    (plan.assignments[i] == fold ? test : train).push_back(static_cast<Index>(i));
  if (train.empty() || test.empty()) throw ValidationError("degenerate fold: empty train or test part");
  return {take_columns(data, train), take_columns(data, test)};
}

DataMatrixd bootstrap_sample(const DataMatrixd& data, std::uint64_t seed) {
  if (data.size() < 1) throw ValidationError("cannot bootstrap an empty data set");
  Rng rng(seed);
  std::vector<Index> cols(static_cast<std::size_t>(data.size()));
  for (auto& c : cols) c = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(data.size())));
  return take_columns(data, cols);
}

DataMatrixd select_columns(const DataMatrixd& data, const std::vector<Index>& columns) {
  for (Index c : columns)
    if (c < 0 || c >= data.size()) throw ValidationError("column index out of range");
  return take_columns(data, columns);
}

std::vector<Index> subsample_indices(Index n, Index count, std::uint64_t seed) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  const auto m = static_cast<std::size_t>(std::min(n, std::max<Index>(count, 0)));
  Rng rng(seed);
  // Partial Fisher-Yates: the first m slots become the sample.
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_int(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace mae
