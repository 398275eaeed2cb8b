#include "ordinal/data.hpp"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "ordinal/rng.hpp"

namespace ordinal {

namespace {

void check_config(const SyntheticConfig& c) {
  require(c.n_classes >= 2, "generate_synthetic: n_classes must be >= 2");
  require(c.n_groups >= 1, "generate_synthetic: n_groups must be >= 1");
  require(c.samples_per_group >= 1, "generate_synthetic: samples_per_group must be >= 1");
  require(c.feature_dim >= 1, "generate_synthetic: feature_dim must be >= 1");
  require(c.distractor_dims >= 0, "generate_synthetic: distractor_dims must be >= 0");
  require(c.class_separation > 0.0, "generate_synthetic: class_separation must be > 0");
  require(c.noise_std > 0.0, "generate_synthetic: noise_std must be > 0");
  require(c.class_priors.size() == static_cast<std::size_t>(c.n_classes),
          "generate_synthetic: class_priors length must equal n_classes");
  double sum = 0.0;
  for (double p : c.class_priors) {
    require(p >= 0.0, "generate_synthetic: class_priors must be non-negative");
    sum += p;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "generate_synthetic: class_priors must sum to 1");
}

int sample_class(const Vec& priors, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t c = 0; c < priors.size(); ++c) {
    acc += priors[c];
    if (u < acc) return static_cast<int>(c);
  }
  return static_cast<int>(priors.size()) - 1;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no, const std::string& what) {
  throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Dataset generate_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
  check_config(config);
  Rng rng(seed);

  const std::size_t d_info = static_cast<std::size_t>(config.feature_dim);
  const std::size_t d = d_info + static_cast<std::size_t>(config.distractor_dims);
  const std::size_t m =
      static_cast<std::size_t>(config.n_groups) * static_cast<std::size_t>(config.samples_per_group);
  const double u_coord = 1.0 / std::sqrt(static_cast<double>(d_info));

  Dataset ds;
  ds.n_classes = config.n_classes;
  ds.X = Mat(m, d);
  ds.labels.resize(m);
  ds.groups.resize(m);

  std::size_t row = 0;
  for (int g = 0; g < config.n_groups; ++g) {
    const int cls = sample_class(config.class_priors, rng);
    const double shift = static_cast<double>(cls) * config.class_separation * u_coord;
    for (int s = 0; s < config.samples_per_group; ++s, ++row) {
      ds.labels[row] = cls;
      ds.groups[row] = g;
      double* x = ds.X.row(row);
      for (std::size_t j = 0; j < d_info; ++j) x[j] = shift + rng.normal(0.0, config.noise_std);
      for (std::size_t j = d_info; j < d; ++j) x[j] = rng.normal();
    }
  }
  return ds;
}

void write_csv(const Dataset& dataset, const std::string& path) {
  require(dataset.size() > 0, "write_csv: empty dataset");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);

  for (std::size_t j = 0; j < dataset.dim(); ++j) out << 'f' << j << ',';
  out << "label,group\n";

  char buf[40];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double* x = dataset.X.row(i);
    for (std::size_t j = 0; j < dataset.dim(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", x[j]);
      out << buf << ',';
    }
    out << dataset.labels[i] << ',' << dataset.groups[i] << '\n';
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

Dataset load_csv(const std::string& path, int expected_n_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);

  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) parse_fail(path, 1, "missing header row");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3) parse_fail(path, 1, "header needs f0,...,label,group");
  const std::size_t d = header.size() - 2;
  for (std::size_t j = 0; j < d; ++j)
    if (header[j] != "f" + std::to_string(j))
      parse_fail(path, 1, "expected column 'f" + std::to_string(j) + "', got '" + header[j] + "'");
  if (header[d] != "label") parse_fail(path, 1, "missing 'label' column");
  if (header[d + 1] != "group") parse_fail(path, 1, "missing 'group' column");

  std::vector<double> values;
  std::vector<int> labels;
  std::vector<std::int64_t> groups;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (cells.size() != header.size())
      parse_fail(path, line_no,
                 "expected " + std::to_string(header.size()) + " columns, got " +
                     std::to_string(cells.size()));

    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      const char* begin = cells[j].data();
      const char* end = begin + cells[j].size();
      auto [ptr, ec] = std::from_chars(begin, end, v);
      if (ec != std::errc{} || ptr != end)
        parse_fail(path, line_no, "malformed feature value '" + cells[j] + "'");
      if (!std::isfinite(v)) parse_fail(path, line_no, "non-finite feature value");
      values.push_back(v);
    }

    int label = 0;
    {
      const char* begin = cells[d].data();
      const char* end = begin + cells[d].size();
      auto [ptr, ec] = std::from_chars(begin, end, label);
      if (ec != std::errc{} || ptr != end)
        parse_fail(path, line_no, "malformed label '" + cells[d] + "'");
      if (label < 0) parse_fail(path, line_no, "negative label");
      if (expected_n_classes > 0 && label >= expected_n_classes)
        parse_fail(path, line_no,
                   "label " + std::to_string(label) + " out of range [0," +
                       std::to_string(expected_n_classes - 1) + "]");
    }

    std::int64_t group = 0;
    {
      const char* begin = cells[d + 1].data();
      const char* end = begin + cells[d + 1].size();
      auto [ptr, ec] = std::from_chars(begin, end, group);
      if (ec != std::errc{} || ptr != end)
        parse_fail(path, line_no, "malformed group '" + cells[d + 1] + "'");
    }

    labels.push_back(label);
    groups.push_back(group);
  }

  if (labels.empty()) parse_fail(path, line_no + 1, "no data rows");

  Dataset ds;
  ds.X = Mat(labels.size(), d);
  ds.X.data = std::move(values);
  ds.labels = std::move(labels);
  ds.groups = std::move(groups);
  ds.n_classes = expected_n_classes > 0
                     ? expected_n_classes
                     : *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  if (ds.n_classes < 2) ds.n_classes = 2;
  return ds;
}

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.n_classes = dataset.n_classes;
  out.X = Mat(indices.size(), dataset.dim());
  out.labels.resize(indices.size());
  out.groups.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    require(indices[i] < dataset.size(), "subset: index out of range");
    const double* src = dataset.X.row(indices[i]);
    std::copy(src, src + dataset.dim(), out.X.row(i));
    out.labels[i] = dataset.labels[indices[i]];
    out.groups[i] = dataset.groups[indices[i]];
  }
  return out;
}

namespace {

// Unique group ids in first-appearance order, plus member row indices.
std::pair<std::vector<std::int64_t>, std::map<std::int64_t, std::vector<std::size_t>>>
collect_groups(const Dataset& dataset) {
  std::vector<std::int64_t> ids;
  std::map<std::int64_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    auto [it, inserted] = members.try_emplace(dataset.groups[i]);
    if (inserted) ids.push_back(dataset.groups[i]);
    it->second.push_back(i);
  }
  return {std::move(ids), std::move(members)};
}

}  // namespace

std::pair<Dataset, Dataset> group_holdout_split(const Dataset& dataset, double test_fraction,
                                                std::uint64_t seed) {
  require(test_fraction > 0.0 && test_fraction < 1.0,
          "group_holdout_split: test_fraction must lie in (0,1)");
  auto [ids, members] = collect_groups(dataset);
  require(ids.size() >= 2, "group_holdout_split: need at least 2 groups");

  Rng rng(seed);
  rng.shuffle(ids);

  const double target = test_fraction * static_cast<double>(dataset.size());
  std::vector<std::size_t> test_idx, train_idx;
  std::size_t taken = 0;
  bool filling_test = true;
  for (std::int64_t id : ids) {
    auto& rows = members[id];
    if (filling_test) {
      test_idx.insert(test_idx.end(), rows.begin(), rows.end());
      taken += rows.size();
      if (static_cast<double>(taken) >= target) filling_test = false;
    } else {
      train_idx.insert(train_idx.end(), rows.begin(), rows.end());
    }
  }
  require(!train_idx.empty(), "group_holdout_split: test fraction swallowed every group");

  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {subset(dataset, train_idx), subset(dataset, test_idx)};
}

FoldAssignment group_kfold(const Dataset& dataset, int k, std::uint64_t seed) {
  require(k >= 2, "group_kfold: k must be >= 2");
  auto [ids, members] = collect_groups(dataset);
  require(static_cast<std::size_t>(k) <= ids.size(),
          "group_kfold: k exceeds the number of groups");

  Rng rng(seed);
  rng.shuffle(ids);

  FoldAssignment fa;
  fa.k = k;
  fa.group_ids = ids;
  fa.fold_of_group.resize(ids.size());
  fa.train_indices.assign(static_cast<std::size_t>(k), {});
  fa.val_indices.assign(static_cast<std::size_t>(k), {});

  for (std::size_t g = 0; g < ids.size(); ++g) {
    const int fold = static_cast<int>(g % static_cast<std::size_t>(k));
    fa.fold_of_group[g] = fold;
    const auto& rows = members[ids[g]];
    for (int f = 0; f < k; ++f) {
      auto& dst = (f == fold) ? fa.val_indices[static_cast<std::size_t>(f)]
                              : fa.train_indices[static_cast<std::size_t>(f)];
      dst.insert(dst.end(), rows.begin(), rows.end());
    }
  }
  for (int f = 0; f < k; ++f) {
    std::sort(fa.train_indices[static_cast<std::size_t>(f)].begin(),
              fa.train_indices[static_cast<std::size_t>(f)].end());
    std::sort(fa.val_indices[static_cast<std::size_t>(f)].begin(),
              fa.val_indices[static_cast<std::size_t>(f)].end());
  }
  return fa;
}

}  // namespace ordinal
