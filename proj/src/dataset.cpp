#include "frmom/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "frmom/csv_format.hpp"
#include "frmom/errors.hpp"

namespace frmom::objectives {

void LabeledDataset::validate() const {
  if (inputs.size() != labels.size()) {
    throw DimensionError("LabeledDataset: inputs and labels differ in length");
  }
  const std::size_t dim = feature_dim();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != dim) throw DimensionError("LabeledDataset: ragged feature vectors");
    if (labels[i] >= num_classes) {
      std::ostringstream os;
      os << "LabeledDataset: label " << labels[i] << " at row " << i << " >= class count "
         << num_classes;
      throw DomainError(os.str());
    }
    if (unit_box) {
      for (double v : inputs[i]) {
        if (!(v >= 0.0 && v <= 1.0)) {
          throw DomainError("LabeledDataset: unit-box dataset has a coordinate outside [0, 1]");
        }
      }
    }
  }
}

LabeledDataset make_two_moons(std::size_t n, double noise, Rng& rng) {
  LabeledDataset data;
  data.num_classes = 2;
  data.unit_box = true;
  data.inputs.reserve(n);
  data.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % 2;
    const double t = rng.uniform(0.0, std::numbers::pi);
    double x = label == 0 ? std::cos(t) : 1.0 - std::cos(t);
    double y = label == 0 ? std::sin(t) : 0.5 - std::sin(t);
    x += noise * rng.normal();
    y += noise * rng.normal();
    data.inputs.push_back({x, y});
    data.labels.push_back(label);
  }
  for (std::size_t j = 0; j < 2 && n > 0; ++j) {
    double lo = data.inputs.front()[j];
    double hi = lo;
    for (const auto& v : data.inputs) {
      lo = std::min(lo, v[j]);
      hi = std::max(hi, v[j]);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    for (auto& v : data.inputs) v[j] = std::clamp((v[j] - lo) / span, 0.0, 1.0);
  }
  return data;
}

LabeledDataset make_blobs(std::size_t n, std::size_t dim, std::size_t classes, double spread,
                          Rng& rng) {
  if (classes == 0 || dim == 0) throw DomainError("make_blobs: need classes > 0 and dim > 0");
  std::vector<Vector> centres(classes, Vector(dim));
  for (auto& c : centres) {
    for (double& v : c) v = rng.uniform(-1.0, 1.0);
  }
  LabeledDataset data;
  data.num_classes = classes;
  data.inputs.reserve(n);
  data.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % classes;
    Vector x(dim);
    for (std::size_t j = 0; j < dim; ++j) x[j] = centres[label][j] + spread * rng.normal();
    data.inputs.push_back(std::move(x));
    data.labels.push_back(label);
  }
  return data;
}

void write_dataset_csv(const LabeledDataset& data, std::ostream& out) {
  const std::size_t dim = data.feature_dim();
  for (std::size_t j = 0; j < dim; ++j) out << 'f' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.inputs[i]) out << format_real(v) << ',';
    out << data.labels[i] << '\n';
  }
}

LabeledDataset read_dataset_csv(std::istream& in, bool unit_box, std::size_t num_classes) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("read_dataset_csv: missing header");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 2 || line.substr(line.rfind(',') + 1) != "label") {
    throw DomainError("read_dataset_csv: header must be f0,...,fk,label");
  }
  LabeledDataset data;
  data.unit_box = unit_box;
  std::size_t max_label = 0;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    Vector x;
    std::size_t label = 0;
    std::size_t col = 0;
    while (std::getline(cells, cell, ',')) {
      try {
        if (col + 1 < columns) {
          x.push_back(parse_real(cell));
        } else {
          label = static_cast<std::size_t>(std::stoul(cell));
        }
      } catch (const std::exception&) {
        throw DomainError("read_dataset_csv: bad cell '" + cell + "' at row " + std::to_string(row));
      }
      ++col;
    }
    if (col != columns) {
      throw DimensionError("read_dataset_csv: wrong column count at row " + std::to_string(row));
    }
    max_label = std::max(max_label, label);
    data.inputs.push_back(std::move(x));
    data.labels.push_back(label);
  }
  data.num_classes = std::max(num_classes, data.labels.empty() ? 0 : max_label + 1);
  data.validate();
  return data;
}

}  // namespace frmom::objectives
