// tads: command-line front end for building, combining and analysing
// typed affine decision structures.
//
// Exit codes: 0 success / property holds, 1 property violated, 2 usage or
// input error.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tads/analysis.hpp"
#include "tads/dot.hpp"
#include "tads/error.hpp"

namespace {

using json = nlohmann::json;
using namespace tads;

constexpr int kOk = 0;
constexpr int kViolated = 1;
constexpr int kError = 2;

// Raised for bad input files and arguments; reported with exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v == 0.0 ? 0.0 : v);
  return {buf, res.ptr};
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw InputError(std::string(flag) + ": empty entry in '" + text + "'");
    item = item.substr(b, e - b + 1);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw InputError(std::string(flag) + ": '" + item + "' is not a decimal number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw InputError(std::string(flag) + ": no values given");
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path + ": cannot write file");
  out << text;
  if (!out) throw InputError(path + ": write failed");
}

struct Loaded {
  Tads tads;
  bool from_network = false;
};

// Network JSON has "layers", TADS JSON has "nodes".
Loaded load_any(const std::string& path, bool prune = true) {
  const std::string text = read_file(path);
  try {
    const json doc = json::parse(text);
    if (doc.is_object() && doc.contains("layers")) {
      return {net_to_tads(parse_network(text), {.prune_infeasible = prune}), true};
    }
    if (doc.is_object() && doc.contains("nodes")) return {tads_from_json(text), false};
    throw InputError(path + ": neither a network (\"layers\") nor a TADS (\"nodes\") document");
  } catch (const json::exception& e) {
    throw InputError(path + ": malformed JSON: " + e.what());
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

Domain parse_box(const std::string& text, std::size_t dim) {
  if (text.empty()) return std::nullopt;
  const auto v = parse_list(text, "--box");
  if (v.size() != 2 || !(v[0] <= v[1])) throw InputError("--box expects lo,hi with lo <= hi");
  return box(dim, v[0], v[1]);
}

json region_json(const PathCondition& pc) {
  json out = json::array();
  for (const auto& h : pc.constraints()) out.push_back(h.to_string(6));
  return out;
}

json vector_json(const Vector& x) {
  json out = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(x(i));
  return out;
}

// Type errors between two inputs name both files.
template <class F>
auto with_pair(const std::vector<std::string>& files, F&& f) {
  try {
    return f();
  } catch (const DimensionError& e) {
    throw InputError(files[0] + ", " + files[1] + ": " + e.what());
  }
}

struct Options {
  std::vector<std::string> files;
  std::string output;
  std::string input;
  std::string box;
  double atol = kDefaultAtol;
  double epsilon = 0.0;
  double threshold = 0.5;
  double factor = 1.0;
  double class_value = 1.0;
  bool full_dim = false;
  bool list = false;
  bool no_prune = false;
  std::string bounds = "0,1,0,1";
  std::size_t steps = 101;
  int jobs = 0;
  std::string diff_output;
};

int cmd_convert(const Options& o) {
  const auto in = load_any(o.files[0], !o.no_prune);
  write_output(o.output, tads_to_json(in.tads));
  std::fprintf(stderr, "%zu nodes, %zu paths\n", in.tads.size(), path_count(in.tads));
  return kOk;
}

int cmd_eval(const Options& o) {
  const auto in = load_any(o.files[0]);
  const auto xs = parse_list(o.input, "--input");
  if (xs.size() != in.tads.in_dim()) {
    throw InputError("--input: expected " + std::to_string(in.tads.in_dim()) + " values, got " +
                     std::to_string(xs.size()));
  }
  const Vector x = Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  const Vector y = evaluate(in.tads, x);
  std::string line;
  for (Eigen::Index i = 0; i < y.size(); ++i) line += (i ? "," : "") + number(y(i));
  write_output(o.output, line + "\n");
  return kOk;
}

int cmd_reduce(const Options& o) {
  const auto in = load_any(o.files[0]);
  const Tads r = reduce(in.tads, o.atol);
  write_output(o.output, tads_to_json(r));
  std::fprintf(stderr, "%zu -> %zu nodes\n", in.tads.size(), r.size());
  return kOk;
}

int cmd_regions(const Options& o) {
  const auto in = load_any(o.files[0]);
  RegionOptions ro;
  ro.only_full_dim = o.full_dim;
  ro.domain = parse_box(o.box, in.tads.in_dim());
  const auto regions = enumerate_regions(in.tads, ro);
  std::string out = std::to_string(regions.size()) + "\n";
  if (o.list) {
    for (const auto& r : regions) {
      std::string cond;
      for (const auto& h : r.pc.constraints()) cond += (cond.empty() ? "" : " && ") + h.to_string();
      out += (cond.empty() ? std::string("true") : cond) + "  ->  " + r.fn.to_string() + "\n";
    }
  }
  write_output(o.output, out);
  return kOk;
}

int cmd_binary(const Options& o, const std::string& op) {
  const auto a = load_any(o.files[0]);
  const auto b = load_any(o.files[1]);
  const Tads r = with_pair(o.files, [&] {
    if (op == "add") return add(a.tads, b.tads);
    if (op == "sub") return sub(a.tads, b.tads);
    return compose(a.tads, b.tads);
  });
  write_output(o.output, tads_to_json(r));
  return kOk;
}

int cmd_scale(const Options& o) {
  const auto in = load_any(o.files[0]);
  write_output(o.output, tads_to_json(scale(o.factor, in.tads)));
  return kOk;
}

int cmd_equiv(const Options& o) {
  const auto a = load_any(o.files[0]);
  const auto b = load_any(o.files[1]);
  const auto rep = with_pair(o.files, [&] {
    return check_equivalence(a.tads, b.tads, o.atol, parse_box(o.box, a.tads.in_dim()));
  });
  std::printf("%s\n", rep.equivalent ? "equivalent" : "not equivalent");
  if (!rep.equivalent) std::printf("%zu witness regions\n", rep.witnesses.size());
  if (!o.output.empty()) {
    json doc{{"equivalent", rep.equivalent}, {"atol", rep.atol}};
    json ws = json::array();
    for (const auto& w : rep.witnesses) {
      ws.push_back({{"region", region_json(w.region)},
                    {"difference", w.difference.to_string(6)},
                    {"sample", vector_json(w.sample)}});
    }
    doc["witnesses"] = ws;
    doc["diff"] = json::parse(tads_to_json(rep.diff));
    write_output(o.output, doc.dump(1) + "\n");
  }
  return rep.equivalent ? kOk : kViolated;
}

int cmd_epsilon(const Options& o) {
  const auto a = load_any(o.files[0]);
  const auto b = load_any(o.files[1]);
  const auto rep = with_pair(o.files, [&] {
    return check_epsilon_similarity(a.tads, b.tads, o.epsilon, parse_box(o.box, a.tads.in_dim()));
  });
  std::printf("%s at epsilon %s\n", rep.similar ? "similar" : "not similar", number(rep.epsilon).c_str());
  if (!rep.similar) {
    std::printf("%zu violation regions\n", rep.violations.size());
    for (const auto& v : rep.violations) {
      std::string xs;
      for (Eigen::Index i = 0; i < v.sample.size(); ++i) xs += (i ? "," : "") + number(v.sample(i));
      std::printf("  sample (%s) excess %s\n", xs.c_str(), number(v.excess).c_str());
    }
  }
  if (!o.output.empty()) {
    json doc{{"similar", rep.similar}, {"epsilon", rep.epsilon}};
    json vs = json::array();
    for (const auto& v : rep.violations) {
      vs.push_back({{"region", region_json(v.region)},
                    {"sample", vector_json(v.sample)},
                    {"excess", v.excess},
                    {"excess_function", v.excess_fn.to_string(6)}});
    }
    doc["violations"] = vs;
    doc["sim"] = json::parse(tads_to_json(rep.sim));
    write_output(o.output, doc.dump(1) + "\n");
  }
  return rep.similar ? kOk : kViolated;
}

int cmd_classify(const Options& o) {
  const auto in = load_any(o.files[0]);
  write_output(o.output, tads_to_json(make_threshold_classifier(in.tads, o.threshold)));
  return kOk;
}

int cmd_characterize(const Options& o) {
  const auto in = load_any(o.files[0]);
  const auto regions =
      class_characterization(in.tads, o.class_value, parse_box(o.box, in.tads.in_dim()), o.atol);
  std::string out = std::to_string(regions.size()) + "\n";
  for (const auto& pc : regions) {
    std::string cond;
    for (const auto& h : pc.constraints()) cond += (cond.empty() ? "" : " && ") + h.to_string();
    out += (cond.empty() ? std::string("true") : cond) + "\n";
  }
  write_output(o.output, out);
  return kOk;
}

int cmd_compare(const Options& o) {
  const auto a = load_any(o.files[0]);
  const auto b = load_any(o.files[1]);
  const auto cmp = with_pair(o.files, [&] { return compare_classifiers(a.tads, b.tads); });
  RegionOptions ro;
  ro.domain = parse_box(o.box, a.tads.in_dim());
  std::size_t agree = 0, disagree = 0;
  for (const auto& r : enumerate_regions(cmp.agreement, ro)) {
    (r.fn.b()(0) == 1.0 ? agree : disagree) += 1;
  }
  std::printf("%zu agreeing regions, %zu disagreeing regions\n", agree, disagree);
  if (!o.output.empty()) write_output(o.output, tads_to_json(cmp.agreement));
  if (!o.diff_output.empty()) write_output(o.diff_output, tads_to_json(cmp.signed_diff));
  return kOk;
}

int cmd_dot(const Options& o) {
  const auto in = load_any(o.files[0]);
  write_output(o.output, to_dot(in.tads));
  return kOk;
}

int cmd_grid(const Options& o) {
  const auto in = load_any(o.files[0]);
  const auto b = parse_list(o.bounds, "--bounds");
  if (b.size() != 4) throw InputError("--bounds expects lo0,hi0,lo1,hi1");
  kernels::set_num_threads(o.jobs);
  write_output(o.output, grid_csv(in.tads, {b[0], b[1], b[2], b[3], o.steps}, o.jobs != 1));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build, combine and analyse typed affine decision structures"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  Options o;

  auto files = [&](CLI::App* sub, int n, const std::string& what) {
    sub->add_option("files", o.files, what)->required()->expected(n);
  };
  auto out_flag = [&](CLI::App* sub) { sub->add_option("-o,--output", o.output, "Output path (default stdout)"); };
  auto box_flag = [&](CLI::App* sub) {
    sub->add_option("--box", o.box, "Restrict to the box [lo,hi]^n, given as lo,hi");
  };

  auto* convert = app.add_subcommand("convert", "Network JSON to TADS JSON");
  files(convert, 1, "Network (or TADS) file");
  out_flag(convert);
  convert->add_flag("--no-prune", o.no_prune, "Keep infeasible branches");

  auto* eval = app.add_subcommand("eval", "Evaluate at one point");
  files(eval, 1, "Network or TADS file");
  eval->add_option("--input", o.input, "Comma-separated coordinates")->required();
  out_flag(eval);

  auto* red = app.add_subcommand("reduce", "Vacuity then semantic reduction");
  files(red, 1, "TADS file");
  red->add_option("--atol", o.atol, "Leaf merge tolerance");
  out_flag(red);

  auto* regions = app.add_subcommand("regions", "Count feasible regions");
  files(regions, 1, "TADS file");
  regions->add_flag("--full-dim", o.full_dim, "Only regions with nonempty interior");
  regions->add_flag("--list", o.list, "Print every region");
  box_flag(regions);
  out_flag(regions);

  auto* add_cmd = app.add_subcommand("add", "Pointwise sum");
  auto* sub_cmd = app.add_subcommand("sub", "Pointwise difference");
  auto* compose_cmd = app.add_subcommand("compose", "Composition: apply the first, then the second");
  for (auto* s : {add_cmd, sub_cmd, compose_cmd}) {
    files(s, 2, "Two TADS files");
    out_flag(s);
  }

  auto* scale_cmd = app.add_subcommand("scale", "Scalar multiple");
  files(scale_cmd, 1, "TADS file");
  scale_cmd->add_option("--factor", o.factor, "Scalar")->required();
  out_flag(scale_cmd);

  auto* equiv = app.add_subcommand("equiv", "Semantic equivalence (exit 1 if not equivalent)");
  files(equiv, 2, "Two TADS files");
  equiv->add_option("--atol", o.atol, "Tolerance for zero leaves");
  box_flag(equiv);
  out_flag(equiv);

  auto* eps = app.add_subcommand("epsilon", "Epsilon-similarity (exit 1 if violated)");
  files(eps, 2, "Two scalar-output TADS files");
  eps->add_option("--epsilon", o.epsilon, "Allowed deviation")->required();
  box_flag(eps);
  out_flag(eps);

  auto* classify = app.add_subcommand("classify", "Threshold classifier");
  files(classify, 1, "Scalar-output TADS file");
  classify->add_option("--threshold", o.threshold, "Class 1 when output >= threshold");
  out_flag(classify);

  auto* character = app.add_subcommand("characterize", "Regions of one class");
  files(character, 1, "Classifier TADS file");
  character->add_option("--class", o.class_value, "Class value");
  character->add_option("--atol", o.atol, "Tolerance on leaf constants");
  box_flag(character);
  out_flag(character);

  auto* compare = app.add_subcommand("compare-classifiers", "Agreement and signed difference");
  files(compare, 2, "Two classifier TADS files");
  compare->add_option("-o,--output", o.output, "Agreement structure output");
  compare->add_option("--diff-output", o.diff_output, "Signed difference output");
  box_flag(compare);

  auto* dot = app.add_subcommand("export-dot", "Graphviz rendering");
  files(dot, 1, "TADS file");
  out_flag(dot);

  auto* grid = app.add_subcommand("grid", "CSV grid of a 2-D scalar structure");
  files(grid, 1, "TADS file");
  grid->add_option("--bounds", o.bounds, "lo0,hi0,lo1,hi1");
  grid->add_option("--steps", o.steps, "Points per axis")->check(CLI::PositiveNumber);
  grid->add_option("--jobs", o.jobs, "Worker threads (0: OpenMP default, 1: serial)")->check(CLI::NonNegativeNumber);
  out_flag(grid);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kError;
  }

  try {
    const auto* s = app.get_subcommands().front();
    const std::string name = s->get_name();
    if (name == "convert") return cmd_convert(o);
    if (name == "eval") return cmd_eval(o);
    if (name == "reduce") return cmd_reduce(o);
    if (name == "regions") return cmd_regions(o);
    if (name == "add" || name == "sub" || name == "compose") return cmd_binary(o, name);
    if (name == "scale") return cmd_scale(o);
    if (name == "equiv") return cmd_equiv(o);
    if (name == "epsilon") return cmd_epsilon(o);
    if (name == "classify") return cmd_classify(o);
    if (name == "characterize") return cmd_characterize(o);
    if (name == "compare-classifiers") return cmd_compare(o);
    if (name == "export-dot") return cmd_dot(o);
    if (name == "grid") return cmd_grid(o);
  } catch (const InputError& e) {
    std::fprintf(stderr, "tads: %s\n", e.what());
    return kError;
  } catch (const std::exception& e) {
    std::string inputs;
    for (const auto& f : o.files) inputs += (inputs.empty() ? "" : ", ") + f;
    std::fprintf(stderr, "tads: %s: %s\n", inputs.c_str(), e.what());
    return kError;
  }
  return kError;
}
