#pragma once

// Piece-wise linear neural networks: a chain of affine steps and partial
// ReLUs, with a denotational evaluator and a small-step (SOS) evaluator.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tads/affine.hpp"

namespace tads {

// relu^k_i: clamps component `index` (0-based) of an R^dim vector at zero.
struct PartialRelu {
  std::size_t dim = 0;
  std::size_t index = 0;
  friend bool operator==(const PartialRelu&, const PartialRelu&) = default;
};

using Step = std::variant<AffineFunction, PartialRelu>;

std::size_t step_in_dim(const Step& s);
std::size_t step_out_dim(const Step& s);

class Network {
 public:
  Network() = default;
  // Verifies the dimension chain; throws DimensionError naming the step index.
  Network(std::string name, std::size_t input_dim, std::vector<Step> steps);

  const std::string& name() const noexcept { return name_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  std::span<const Step> steps() const noexcept { return steps_; }
  std::size_t relu_count() const;

 private:
  std::string name_;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  std::vector<Step> steps_;
};

// Sequential composition A;B (run A, then B).
Network concat(const Network& first, const Network& second, std::string name = {});

// ReLU^k expanded as relu^k_0 ; ... ; relu^k_{k-1}.
std::vector<Step> full_relu(std::size_t k);

// Network JSON format:
//   {"name": ..., "input_dim": n,
//    "layers": [{"type":"affine","W":[[...]],"b":[...]}, {"type":"relu"}, ...]}
// Full ReLU layers are expanded into partial ReLUs.  Throws FormatError
// (malformed JSON or layer) or DimensionError (chain break), both naming the
// layer index.
Network parse_network(std::string_view json_text);
Network load_network(const std::string& path);
// Consecutive partial ReLUs covering 0..k-1 in order are written back as one
// "relu" layer; other partial-ReLU runs are rejected since the format cannot
// express them.
std::string network_to_json(const Network& net);

// Denotational semantics: left-to-right application of every step.
Vector evaluate(const Network& net, const Vector& x);

enum class StepLabel { True, One, Zero };
char label_char(StepLabel l);  // 't', '1', '0'

struct ConcreteConfig {
  std::span<const Step> remaining;
  Vector x;
};

// One SOS transition: Affine (label True), ReLU 1 when x_i >= 0 (label One),
// ReLU 2 when x_i < 0 (label Zero, component zeroed).
// Precondition: remaining is non-empty.
std::pair<StepLabel, ConcreteConfig> sos_step(const ConcreteConfig& c);

struct SosTrace {
  Vector output;
  std::vector<StepLabel> word;
};

SosTrace sos_run(const Network& net, const Vector& x);

}  // namespace tads
