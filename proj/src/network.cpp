#include "tads/network.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tads/error.hpp"

namespace tads {

using nlohmann::json;

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

std::size_t step_in_dim(const Step& s) {
  return std::visit(overloaded{[](const AffineFunction& f) { return f.in_dim(); },
                               [](const PartialRelu& r) { return r.dim; }},
                    s);
}

std::size_t step_out_dim(const Step& s) {
  return std::visit(overloaded{[](const AffineFunction& f) { return f.out_dim(); },
                               [](const PartialRelu& r) { return r.dim; }},
                    s);
}

Network::Network(std::string name, std::size_t input_dim, std::vector<Step> steps)
    : name_(std::move(name)), input_dim_(input_dim), steps_(std::move(steps)) {
  std::size_t dim = input_dim_;
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    if (const auto* r = std::get_if<PartialRelu>(&steps_[k]); r && r->index >= r->dim) {
      throw DimensionError("step " + std::to_string(k) + ": relu index " +
                           std::to_string(r->index) + " out of range for dimension " +
                           std::to_string(r->dim));
    }
    if (step_in_dim(steps_[k]) != dim) {
      throw DimensionError("step " + std::to_string(k) + ": " +
                           dims_message("dimension chain", dim, step_in_dim(steps_[k])));
    }
    dim = step_out_dim(steps_[k]);
  }
  output_dim_ = dim;
}

std::size_t Network::relu_count() const {
  std::size_t n = 0;
  for (const auto& s : steps_) n += std::holds_alternative<PartialRelu>(s);
  return n;
}

Network concat(const Network& first, const Network& second, std::string name) {
  std::vector<Step> steps(first.steps().begin(), first.steps().end());
  steps.insert(steps.end(), second.steps().begin(), second.steps().end());
  if (name.empty()) name = first.name() + ";" + second.name();
  return {std::move(name), first.input_dim(), std::move(steps)};
}

std::vector<Step> full_relu(std::size_t k) {
  std::vector<Step> steps;
  steps.reserve(k);
  for (std::size_t i = 0; i < k; ++i) steps.emplace_back(PartialRelu{k, i});
  return steps;
}

namespace {

Matrix parse_matrix(const json& j, std::size_t layer) {
  const auto where = "layer " + std::to_string(layer) + ": ";
  if (!j.is_array() || j.empty()) throw FormatError(where + "\"W\" must be a non-empty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Matrix W(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto& row = j[r];
    if (!row.is_array()) throw FormatError(where + "row " + std::to_string(r) + " of \"W\" is not an array");
    if (row.size() != cols) {
      throw FormatError(where + "ragged \"W\": row 0 has " + std::to_string(cols) +
                        " entries, row " + std::to_string(r) + " has " +
                        std::to_string(row.size()));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw FormatError(where + "non-numeric entry in \"W\"");
      W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return W;
}

Vector parse_vector(const json& j, const std::string& where, const char* key) {
  if (!j.is_array()) throw FormatError(where + "\"" + key + "\" must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw FormatError(where + "non-numeric entry in \"" + key + "\"");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

}  // namespace

Network parse_network(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("network JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("network JSON: top level must be an object");
  if (!doc.contains("input_dim") || !doc["input_dim"].is_number_unsigned()) {
    throw FormatError("network JSON: missing or invalid \"input_dim\"");
  }
  if (!doc.contains("layers") || !doc["layers"].is_array()) {
    throw FormatError("network JSON: missing \"layers\" array");
  }
  const auto input_dim = doc["input_dim"].get<std::size_t>();
  std::string name = doc.value("name", std::string{});

  std::vector<Step> steps;
  std::size_t dim = input_dim;
  const auto& layers = doc["layers"];
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& layer = layers[k];
    const auto where = "layer " + std::to_string(k) + ": ";
    if (!layer.is_object() || !layer.contains("type") || !layer["type"].is_string()) {
      throw FormatError(where + "missing \"type\"");
    }
    const auto type = layer["type"].get<std::string>();
    if (type == "affine") {
      if (!layer.contains("W") || !layer.contains("b")) {
        throw FormatError(where + "affine layer needs \"W\" and \"b\"");
      }
      Matrix W = parse_matrix(layer["W"], k);
      Vector b = parse_vector(layer["b"], where, "b");
      if (b.size() != W.rows()) {
        throw FormatError(where + dims_message("bias length", W.rows(), b.size()));
      }
      if (static_cast<std::size_t>(W.cols()) != dim) {
        throw DimensionError(where + dims_message("dimension chain", dim, W.cols()));
      }
      try {
        steps.emplace_back(AffineFunction(std::move(W), std::move(b)));
      } catch (const DomainError& e) {
        throw FormatError(where + e.what());
      }
      dim = step_out_dim(steps.back());
    } else if (type == "relu") {
      auto relus = full_relu(dim);
      steps.insert(steps.end(), relus.begin(), relus.end());
    } else {
      throw FormatError(where + "unknown layer type \"" + type + "\"");
    }
  }
  return {std::move(name), input_dim, std::move(steps)};
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open network file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str());
}

std::string network_to_json(const Network& net) {
  json layers = json::array();
  const auto steps = net.steps();
  for (std::size_t k = 0; k < steps.size();) {
    if (const auto* f = std::get_if<AffineFunction>(&steps[k])) {
      json W = json::array();
      for (Eigen::Index r = 0; r < f->W().rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < f->W().cols(); ++c) row.push_back(f->W()(r, c));
        W.push_back(std::move(row));
      }
      json b = json::array();
      for (Eigen::Index r = 0; r < f->b().size(); ++r) b.push_back(f->b()(r));
      layers.push_back({{"type", "affine"}, {"W", std::move(W)}, {"b", std::move(b)}});
      ++k;
      continue;
    }
    const auto dim = std::get<PartialRelu>(steps[k]).dim;
    for (std::size_t i = 0; i < dim; ++i) {
      const auto* r = k + i < steps.size() ? std::get_if<PartialRelu>(&steps[k + i]) : nullptr;
      if (!r || r->dim != dim || r->index != i) {
        throw FormatError("step " + std::to_string(k) +
                          ": partial ReLU sequence is not a full in-order ReLU layer");
      }
    }
    layers.push_back({{"type", "relu"}});
    k += dim;
  }
  json doc = {{"name", net.name()}, {"input_dim", net.input_dim()}, {"layers", std::move(layers)}};
  return doc.dump(1);
}

Vector evaluate(const Network& net, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != net.input_dim()) {
    throw DimensionError(dims_message("network eval", net.input_dim(), x.size()));
  }
  Vector v = x;
  for (const auto& s : net.steps()) {
    if (const auto* f = std::get_if<AffineFunction>(&s)) {
      v = (*f)(v);
    } else {
      const auto i = static_cast<Eigen::Index>(std::get<PartialRelu>(s).index);
      if (v(i) < 0.0) v(i) = 0.0;
    }
  }
  return v;
}

char label_char(StepLabel l) {
  switch (l) {
    case StepLabel::True: return 't';
    case StepLabel::One: return '1';
    case StepLabel::Zero: return '0';
  }
  return '?';
}

std::pair<StepLabel, ConcreteConfig> sos_step(const ConcreteConfig& c) {
  if (c.remaining.empty()) throw DomainError("sos_step on a terminal configuration");
  const Step& head = c.remaining.front();
  auto rest = c.remaining.subspan(1);
  if (const auto* f = std::get_if<AffineFunction>(&head)) {
    return {StepLabel::True, {rest, (*f)(c.x)}};
  }
  const auto& r = std::get<PartialRelu>(head);
  if (static_cast<std::size_t>(c.x.size()) != r.dim) {
    throw DimensionError(dims_message("sos_step", r.dim, c.x.size()));
  }
  const auto i = static_cast<Eigen::Index>(r.index);
  if (c.x(i) >= 0.0) return {StepLabel::One, {rest, c.x}};
  return {StepLabel::Zero, {rest, AffineFunction::defect(r.dim, r.index)(c.x)}};
}

SosTrace sos_run(const Network& net, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != net.input_dim()) {
    throw DimensionError(dims_message("sos_run", net.input_dim(), x.size()));
  }
  ConcreteConfig c{net.steps(), x};
  SosTrace trace;
  trace.word.reserve(c.remaining.size());
  while (!c.remaining.empty()) {
    auto [label, next] = sos_step(c);
    trace.word.push_back(label);
    c = std::move(next);
  }
  trace.output = std::move(c.x);
  return trace;
}

}  // namespace tads
