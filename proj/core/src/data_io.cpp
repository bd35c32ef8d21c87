#include "memgrad/data_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace memgrad {

void FeatureDataset::validate() const {
  if (classes < 1) throw ParameterError("dataset needs at least one class");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw ParameterError("feature rows (" + std::to_string(features.rows()) +
                         ") and labels (" + std::to_string(labels.size()) + ") differ");
  }
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] < 0 || labels[n] >= classes) {
      throw ParameterError("label " + std::to_string(labels[n]) + " of sample " +
                           std::to_string(n) + " outside [0, " + std::to_string(classes) + ")");
    }
  }
  if (!features.allFinite()) throw ParameterError("features contain NaN or Inf");
}

FeatureDataset FeatureDataset::subset(const std::vector<std::size_t>& indices) const {
  FeatureDataset out;
  out.classes = classes;
  out.provenance = provenance;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  out.labels.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= size()) throw ParameterError("subset index out of range");
    out.features.row(static_cast<Eigen::Index>(k)) =
        features.row(static_cast<Eigen::Index>(indices[k]));
    out.labels.push_back(labels[indices[k]]);
  }
  return out;
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

double parse_double(const std::string& cell, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw ParseError("'" + cell + "' is not a number", line);
  }
  if (used != cell.size()) throw ParseError("'" + cell + "' is not a number", line);
  return v;
}

constexpr std::string_view kProvenancePrefix = "# provenance: ";

}  // namespace

FeatureDataset load_feature_csv(const std::string& path, int classes) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open feature file '" + path + "'", 0);
  FeatureDataset ds;
  ds.provenance = "file:" + path;

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.rfind(kProvenancePrefix, 0) == 0) {
      ds.provenance = line.substr(kProvenancePrefix.size());
      continue;
    }
    header = split_commas(line);
    break;
  }
  if (header.size() < 2 || header[0] != "label") {
    throw ParseError("expected header 'label,f0,...'", line_no);
  }
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k] != "f" + std::to_string(k - 1)) {
      throw ParseError("header column " + std::to_string(k) + " should be 'f" +
                           std::to_string(k - 1) + "'",
                       line_no);
    }
  }
  const std::size_t dim = header.size() - 1;

  std::vector<double> values;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != dim + 1) {
      throw ParseError("expected " + std::to_string(dim + 1) + " columns, got " +
                           std::to_string(cells.size()),
                       line_no);
    }
    const double lv = parse_double(cells[0], line_no);
    if (lv != std::floor(lv) || lv < 0.0 || lv > 1e9) {
      throw ParseError("label must be a non-negative integer", line_no);
    }
    const int label = static_cast<int>(lv);
    if (classes > 0 && label >= classes) {
      throw ParseError("label " + std::to_string(label) + " outside [0, " +
                           std::to_string(classes) + ")",
                       line_no);
    }
    for (std::size_t k = 1; k <= dim; ++k) {
      const double v = parse_double(cells[k], line_no);
      if (!std::isfinite(v)) throw ParseError("non-finite feature value", line_no);
      values.push_back(v);
    }
    ds.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  if (ds.labels.empty()) throw ParseError("feature file has no rows", line_no);
  ds.classes = classes > 0 ? classes : max_label + 1;
  ds.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(ds.labels.size()), static_cast<Eigen::Index>(dim));
  return ds;
}

void write_feature_csv(const FeatureDataset& dataset, std::ostream& out) {
  dataset.validate();
  const auto precision = out.precision(9);
  if (!dataset.provenance.empty() && dataset.provenance.find('\n') == std::string::npos) {
    out << kProvenancePrefix << dataset.provenance << '\n';
  }
  out << "label";
  for (std::size_t k = 0; k < dataset.dim(); ++k) out << ",f" << k;
  out << '\n';
  for (std::size_t n = 0; n < dataset.size(); ++n) {
    out << dataset.labels[n];
    for (Eigen::Index k = 0; k < dataset.features.cols(); ++k) {
      out << ',' << dataset.features(static_cast<Eigen::Index>(n), k);
    }
    out << '\n';
  }
  out.precision(precision);
}

void save_feature_csv(const FeatureDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_feature_csv(dataset, out);
}

namespace {

std::vector<unsigned char> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open IDX file '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t at) {
  return (std::uint32_t(b[at]) << 24) | (std::uint32_t(b[at + 1]) << 16) |
         (std::uint32_t(b[at + 2]) << 8) | std::uint32_t(b[at + 3]);
}

}  // namespace

FeatureDataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto img = read_all(images_path);
  const auto lab = read_all(labels_path);
  if (img.size() < 16) throw FormatError("IDX image file shorter than its header");
  if (lab.size() < 8) throw FormatError("IDX label file shorter than its header");
  if (be32(img, 0) != 0x00000803) throw FormatError("bad IDX image magic");
  if (be32(lab, 0) != 0x00000801) throw FormatError("bad IDX label magic");
  const std::size_t n = be32(img, 4);
  const std::size_t h = be32(img, 8);
  const std::size_t w = be32(img, 12);
  if (be32(lab, 4) != n) throw FormatError("image and label counts differ");
  const std::size_t dim = h * w;
  if (img.size() != 16 + n * dim) throw FormatError("IDX image payload size mismatch");
  if (lab.size() != 8 + n) throw FormatError("IDX label payload size mismatch");

  FeatureDataset ds;
  ds.provenance = "idx:" + images_path;
  ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  ds.labels.resize(n);
  int max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          img[16 + i * dim + k] / 255.0;
    }
    ds.labels[i] = lab[8 + i];
    max_label = std::max(max_label, ds.labels[i]);
  }
  ds.classes = std::max(10, max_label + 1);
  return ds;
}

FeatureDataset make_cluster_task(const ClusterTaskParams& p) {
  if (p.classes < 2) throw ParameterError("cluster task needs >= 2 classes");
  if (p.dim < 1) throw ParameterError("cluster task needs dim >= 1");
  if (p.n_per_class < 1) throw ParameterError("cluster task needs samples per class");
  if (!(p.noise_sigma >= 0.0) || !(p.center_scale >= 0.0)) {
    throw ParameterError("cluster task scales must be non-negative");
  }
  Rng centers_rng = make_rng(p.seed, 0);
  Rng noise_rng = make_rng(p.seed, 1);
  std::normal_distribution<double> z(0.0, 1.0);

  Matrix centers(p.classes, p.dim);
  for (Eigen::Index c = 0; c < centers.rows(); ++c)
    for (Eigen::Index k = 0; k < centers.cols(); ++k) centers(c, k) = p.center_scale * z(centers_rng);

  FeatureDataset ds;
  ds.classes = p.classes;
  const auto n = static_cast<Eigen::Index>(p.classes) * p.n_per_class;
  ds.features.resize(n, p.dim);
  ds.labels.reserve(static_cast<std::size_t>(n));
  Eigen::Index row = 0;
  for (int c = 0; c < p.classes; ++c) {
    for (int i = 0; i < p.n_per_class; ++i, ++row) {
      for (Eigen::Index k = 0; k < p.dim; ++k) {
        const double v = centers(c, k) + p.noise_sigma * z(noise_rng) + p.shift;
        ds.features(row, k) = std::max(0.0, v);
      }
      ds.labels.push_back(c);
    }
  }
  std::ostringstream prov;
  prov << "cluster-task C=" << p.classes << " D=" << p.dim << " n=" << p.n_per_class
       << " center_scale=" << p.center_scale << " noise_sigma=" << p.noise_sigma
       << " shift=" << p.shift << " seed=" << p.seed;
  ds.provenance = prov.str();
  return ds;
}

void SplitSpec::validate() const {
  if (!(train > 0.0) || !(val > 0.0) || !(test > 0.0)) {
    throw ParameterError("split fractions must be positive");
  }
  if (std::fabs(train + val + test - 1.0) > 1e-9) {
    throw ParameterError("split fractions must sum to 1");
  }
}

SplitIndices split_indices(const FeatureDataset& dataset, const SplitSpec& spec) {
  spec.validate();
  dataset.validate();
  Rng rng = make_rng(spec.seed, 0x5e11);
  SplitIndices out;

  auto distribute = [&](std::vector<std::size_t> idx, const std::string& what) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n = static_cast<double>(idx.size());
    const auto n_train = static_cast<std::size_t>(std::llround(spec.train * n));
    const auto n_val = static_cast<std::size_t>(std::llround(spec.val * n));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= idx.size()) {
      throw ParameterError(what + " has too few samples (" + std::to_string(idx.size()) +
                           ") to split");
    }
    out.train.insert(out.train.end(), idx.begin(), idx.begin() + n_train);
    out.val.insert(out.val.end(), idx.begin() + n_train, idx.begin() + n_train + n_val);
    out.test.insert(out.test.end(), idx.begin() + n_train + n_val, idx.end());
  };

  if (spec.stratified) {
    std::vector<std::vector<std::size_t>> per_class(dataset.classes);
    for (std::size_t i = 0; i < dataset.size(); ++i) per_class[dataset.labels[i]].push_back(i);
    for (int c = 0; c < dataset.classes; ++c) {
      if (per_class[c].empty()) continue;
      distribute(std::move(per_class[c]), "class " + std::to_string(c));
    }
  } else {
    std::vector<std::size_t> all(dataset.size());
    std::iota(all.begin(), all.end(), 0);
    distribute(std::move(all), "dataset");
  }
  // Interleave classes in a seed-determined order so batches mix labels.
  std::shuffle(out.train.begin(), out.train.end(), rng);
  std::shuffle(out.val.begin(), out.val.end(), rng);
  std::shuffle(out.test.begin(), out.test.end(), rng);
  return out;
}

DatasetSplits split(const FeatureDataset& dataset, const SplitSpec& spec) {
  const SplitIndices idx = split_indices(dataset, spec);
  return {dataset.subset(idx.train), dataset.subset(idx.val), dataset.subset(idx.test)};
}

void save_split_json(const SplitIndices& indices, const std::string& path) {
  nlohmann::json j;
  j["train"] = indices.train;
  j["val"] = indices.val;
  j["test"] = indices.test;
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump() << '\n';
}

SplitIndices load_split_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open split file '" + path + "'", 0);
  try {
    const auto j = nlohmann::json::parse(in);
    SplitIndices s;
    j.at("train").get_to(s.train);
    j.at("val").get_to(s.val);
    j.at("test").get_to(s.test);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid split file '" + path + "': " + e.what(), 0);
  }
}

}  // namespace memgrad
