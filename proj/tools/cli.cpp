#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "polynet/constructor.hpp"
#include "polynet/geometry_io.hpp"
#include "polynet/lipschitz.hpp"
#include "polynet/network_io.hpp"
#include "polynet/trainer.hpp"
#include "polynet/verifier.hpp"
#include "polynet/version.hpp"

namespace polynet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Failure carrying the exit code it maps to.
struct Failure {
  Exit code;
  std::string message;
};

struct Run {
  std::string command;
  std::vector<std::string> args;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Failure{kInput, "cannot write " + tmp.string()};
    f << content;
    if (!f) throw Failure{kInput, "failed writing " + tmp.string()};
  }
  fs::rename(tmp, path);
}

void emit(Run& run, const fs::path& path, const std::string& content) {
  write_atomic(path, content);
  run.outputs.push_back(path.string());
}

void write_manifest(const Run& run, const fs::path& dir) {
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - run.start).count();
  json m{{"command", run.command}, {"args", run.args},       {"inputs", run.inputs},
         {"outputs", run.outputs}, {"seed", run.seed},       {"tool_version", kToolVersion},
         {"wall_clock_seconds", seconds}};
  write_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Failure{kInput, "cannot open " + path.string()};
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

GeometrySpec read_geometry(Run& run, const std::string& path) {
  run.inputs.push_back(path);
  try {
    return parse_geometry(read_text(path));
  } catch (const Error& e) {
    throw Failure{kInput, path + ": " + e.what()};
  }
}

Network read_network(Run& run, const std::string& path) {
  run.inputs.push_back(path);
  try {
    return deserialize(read_text(path));
  } catch (const Error& e) {
    throw Failure{kInput, path + ": " + e.what()};
  }
}

double pick_epsilon(const std::optional<double>& flag, const GeometrySpec& spec) {
  const std::optional<double> eps = flag ? flag : spec.epsilon;
  if (!eps) throw Failure{kInput, "no epsilon given on the command line or in the geometry file"};
  if (!(*eps > 0.0)) throw Failure{kInput, "epsilon must be positive"};
  return *eps;
}

std::vector<int> parse_counts(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Failure{kInput, "expected comma-separated nonnegative integers, got '" + text + "'"};
    }
  }
  if (out.empty()) throw Failure{kInput, "empty integer list"};
  return out;
}

Network apply_variant(const Construction& c, const std::string& variant, double delta) {
  if (variant == "pure_relu")
    return c.net.layers().back().is_pool() ? maxpool_to_relu(c.net) : c.net;
  if (variant == "sigmoid_head") return sigmoid_head(c.net, delta);
  return c.net;
}

Construction build_variant(const GeometrySpec& spec, double eps, const std::string& variant,
                           std::optional<double> inner) {
  static const std::map<std::string, std::string> kind_of{
      {"union", "union"}, {"difference", "difference"}, {"complex", "complex"}, {"cuboid", "cuboid_holes"}};
  if (auto it = kind_of.find(variant); it != kind_of.end()) {
    const bool matches = it->second == spec.kind || (variant == "union" && spec.kind == "polytope");
    if (!matches) throw Failure{kInput, "variant '" + variant + "' does not fit a '" + spec.kind + "' geometry"};
  }
  return build_indicator(spec.space, eps, inner ? inner : spec.inner_shell);
}

// build ----------------------------------------------------------------------

struct BuildArgs {
  std::string geometry;
  std::optional<double> epsilon;
  std::string variant = "auto";
  double delta = 0.01;
  std::optional<double> inner_shell;
};

int cmd_build(Run& run, const BuildArgs& a, const fs::path& out_dir, bool as_json, std::ostream& out) {
  const GeometrySpec spec = read_geometry(run, a.geometry);
  const double eps = pick_epsilon(a.epsilon, spec);
  std::optional<Construction> built;
  std::optional<Network> variant_net;
  try {
    built = build_variant(spec, eps, a.variant, a.inner_shell);
    variant_net = apply_variant(*built, a.variant, a.delta);
  } catch (const ConstructionError& e) {
    throw Failure{kConstruction, e.what()};
  } catch (const GeometryError& e) {
    throw Failure{kConstruction, e.what()};
  }
  const Construction& c = *built;
  const Network& net = *variant_net;
  emit(run, out_dir / "network.json", serialize(net));
  emit(run, out_dir / "certificate.json", certificates_to_json(c.certificates));
  write_manifest(run, out_dir);
  const std::string arch = architecture_of(net).to_string();
  if (as_json)
    out << json{{"architecture", arch}, {"gates", c.certificates.size()}, {"epsilon", eps}}.dump() << "\n";
  else
    out << "built " << arch << " (" << c.certificates.size() << " gates, eps " << eps << ")\n";
  return kOk;
}

// bound ----------------------------------------------------------------------

struct BoundArgs {
  std::string geometry;
  std::string histogram;
  std::string betti;
  std::optional<int> dim;
};

int cmd_bound(Run& run, const BoundArgs& a, bool as_json, std::ostream& out) {
  const int forms = !a.geometry.empty() + !a.histogram.empty() + !a.betti.empty();
  if (forms != 1) throw Failure{kInput, "give exactly one of --geometry, --histogram, --betti"};
  std::optional<DimensionHistogram> hist;
  std::optional<BettiProfile> betti;
  int d = a.dim.value_or(0);
  try {
    if (!a.geometry.empty()) {
      const GeometrySpec spec = read_geometry(run, a.geometry);
      d = ambient_dim(spec.space);
      if (const auto* k = std::get_if<SimplicialComplex>(&spec.space)) {
        hist = dimension_histogram(*k);
      } else if (const auto* c = std::get_if<CuboidHoleSpace>(&spec.space)) {
        betti = derive_betti(*c);
        if (!betti) throw Failure{kInput, "Betti numbers of this hole layout are not derivable; pass --betti"};
      } else {
        throw Failure{kInput, "bounds need a complex or cuboid_holes geometry"};
      }
    } else {
      if (!a.dim) throw Failure{kInput, "--dim is required with --histogram or --betti"};
      if (!a.histogram.empty()) hist = DimensionHistogram{parse_counts(a.histogram), d};
      if (!a.betti.empty()) betti = BettiProfile{parse_counts(a.betti)};
    }
    json report{{"dim", d}};
    std::ostringstream text;
    if (hist) {
      const WidthBound b = simplicial_width_bound(d, *hist);
      report["histogram"] = hist->counts;
      report["packing_term"] = b.packing_term;
      report["covering_term"] = b.covering_term;
      report["width_bound"] = b.bound;
      text << "packing term:  " << b.packing_term << "\ncovering term: " << b.covering_term
           << "\nwidth bound:   " << b.bound << "\n";
      if (b.polygon_example_value) {
        report["polygon_example_value"] = *b.polygon_example_value;
        text << "note: the closed-form polygon example quotes " << *b.polygon_example_value
             << "; the general formula gives " << b.packing_term << "\n";
      }
    }
    if (betti) {
      const Architecture arch = betti_architecture(d, *betti);
      report["betti"] = betti->betti;
      report["architecture"] = arch.widths;
      text << "architecture: " << arch.to_string() << "\n";
    }
    out << (as_json ? report.dump(2) + "\n" : text.str());
  } catch (const Error& e) {
    throw Failure{kInput, e.what()};
  }
  return kOk;
}

// verify ---------------------------------------------------------------------

struct VerifyArgs {
  std::string network;
  std::string geometry;
  std::optional<double> epsilon;
  double p = 1.0;
  long samples = 10000;
  std::optional<double> inner_shell;
};

int cmd_verify(Run& run, const VerifyArgs& a, const fs::path& out_dir, bool as_json, std::ostream& out) {
  const Network net = read_network(run, a.network);
  const GeometrySpec spec = read_geometry(run, a.geometry);
  const double eps = pick_epsilon(a.epsilon, spec);
  if (a.samples < 4) throw Failure{kInput, "--samples must be at least 4"};
  SamplingPlan plan;
  plan.n_inside = plan.n_shell = plan.n_outside = plan.n_box = a.samples / 4;
  plan.seed = run.seed;
  plan.p = a.p;
  CheckOptions options;
  if (spec.kind == "difference" || spec.kind == "cuboid_holes")
    options.negative_clearance = a.inner_shell.value_or(spec.inner_shell.value_or(eps / 10.0));
  VerificationReport report;
  try {
    report = check_indicator(net, spec.space, eps, plan, options);
  } catch (const Error& e) {
    throw Failure{kInput, e.what()};
  }
  const std::string text = report.to_json();
  emit(run, out_dir / "report.json", text);
  write_manifest(run, out_dir);
  if (as_json)
    out << text;
  else
    out << (report.passed() ? "PASS" : "FAIL") << " inside=" << report.pass_inside
        << " outside=" << report.pass_outside << " range=" << report.pass_range
        << " max_dev_inside=" << report.max_dev_inside << " max_val_outside=" << report.max_val_outside
        << " lp_error=" << report.lp_error_estimate << " +- " << report.lp_ci_halfwidth << "\n";
  return report.passed() ? kOk : kVerification;
}

// train ----------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string geometry;
  std::optional<int> resolution;
  std::string manual;
};

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Failure{kInput, std::string("config field '") + key + "' has the wrong type"};
  }
}

fs::path relative_to(const fs::path& base_file, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base_file.parent_path() / path;
}

int cmd_train(Run& run, const TrainArgs& a, std::optional<std::uint64_t> seed_flag, const fs::path& out_dir,
              bool as_json, std::ostream& out) {
  run.inputs.push_back(a.config);
  json cfg_json;
  try {
    cfg_json = json::parse(read_text(a.config));
  } catch (const json::parse_error& e) {
    throw Failure{kInput, a.config + ": " + e.what()};
  }
  if (!cfg_json.is_object()) throw Failure{kInput, a.config + ": expected a JSON object"};

  TrainConfig cfg;
  try {
    cfg.loss = loss_from_string(get_or<std::string>(cfg_json, "loss", "mse"));
    cfg.learning_rate = get_or<double>(cfg_json, "learning_rate", 0.005);
    cfg.epochs = get_or<long>(cfg_json, "epochs", 50000);
    cfg.init.kind = init_from_string(get_or<std::string>(cfg_json, "init", "he_uniform"));
    cfg.seed = seed_flag.value_or(get_or<std::uint64_t>(cfg_json, "seed", 0));
    cfg.early_stop = get_or<bool>(cfg_json, "early_stop", false);
  } catch (const ConfigError& e) {
    throw Failure{kInput, e.what()};
  }
  run.seed = cfg.seed;
  const double sigma = get_or<double>(cfg_json, "perturb", 0.0);
  const int resolution = a.resolution.value_or(get_or<int>(cfg_json, "resolution", 40));
  std::string geometry = a.geometry;
  if (geometry.empty() && cfg_json.contains("geometry"))
    geometry = relative_to(a.config, get_or<std::string>(cfg_json, "geometry", "")).string();
  if (geometry.empty()) throw Failure{kInput, "training needs a geometry (config field or --geometry)"};
  const GeometrySpec spec = read_geometry(run, geometry);
  const int d = ambient_dim(spec.space);

  Box box{Vector::Constant(d, -20.0), Vector::Constant(d, 20.0)};
  if (cfg_json.contains("box")) {
    const auto lo = get_or<std::vector<double>>(cfg_json["box"], "min", {});
    const auto hi = get_or<std::vector<double>>(cfg_json["box"], "max", {});
    if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
      throw Failure{kInput, "config box must give min and max with one entry per dimension"};
    box = {Eigen::Map<const Vector>(lo.data(), d), Eigen::Map<const Vector>(hi.data(), d)};
  }

  std::optional<Architecture> arch;
  if (cfg_json.contains("architecture")) {
    const json& aj = cfg_json["architecture"];
    Architecture parsed;
    parsed.widths = get_or<std::vector<int>>(aj, "widths", {});
    try {
      for (const auto& name : get_or<std::vector<std::string>>(aj, "activations", {}))
        parsed.activations.push_back(activation_from_string(name));
    } catch (const FormatError& e) {
      throw Failure{kInput, e.what()};
    }
    arch = parsed;
  }

  Network start(d, {});
  try {
    if (cfg.init.kind == InitKind::Manual) {
      std::string manual = a.manual;
      if (manual.empty() && cfg_json.contains("manual_network"))
        manual = relative_to(a.config, get_or<std::string>(cfg_json, "manual_network", "")).string();
      Network base(d, {});
      if (!manual.empty()) {
        base = read_network(run, manual);
      } else {
        const double eps = pick_epsilon(std::nullopt, spec);
        const Construction c = build_indicator(spec.space, eps, spec.inner_shell);
        base = apply_variant(c, get_or<std::string>(cfg_json, "variant", "auto"),
                             get_or<double>(cfg_json, "delta", 0.01));
      }
      cfg.init.manual = base;
      start = init(arch.value_or(architecture_of(base)), cfg.init, cfg.seed);
    } else {
      if (!arch) throw Failure{kInput, "config needs an architecture for non-manual initialization"};
      start = init(*arch, cfg.init, cfg.seed);
    }
    if (sigma > 0.0) start = perturb(start, sigma, cfg.seed);
  } catch (const ConfigError& e) {
    throw Failure{kInput, e.what()};
  } catch (const ConstructionError& e) {
    throw Failure{kConstruction, e.what()};
  }

  const Dataset data = lattice_dataset(spec.space, box, resolution);
  TrainResult result{start, {}, false};
  try {
    result = train(start, data, cfg);
  } catch (const ConfigError& e) {
    throw Failure{kInput, e.what()};
  }

  std::ostringstream curve, lines, grid;
  write_loss_csv(curve, result.curve);
  emit(run, out_dir / "loss.csv", curve.str());
  emit(run, out_dir / "network.json", serialize(result.net));
  if (d == 2) {
    write_zero_lines_csv(lines, zero_lines(result.net));
    emit(run, out_dir / "zero_lines.csv", lines.str());
    write_prediction_grid_csv(grid, result.net, box, resolution);
    emit(run, out_dir / "predictions.csv", grid.str());
  }
  write_manifest(run, out_dir);

  const double final_loss = result.curve.empty() ? std::numeric_limits<double>::quiet_NaN() : result.curve.back();
  if (as_json)
    out << json{{"final_loss", final_loss}, {"epochs", result.curve.empty() ? 0 : result.curve.size() - 1},
                {"diverged", result.diverged}}
               .dump()
        << "\n";
  else
    out << (result.diverged ? "diverged" : "trained") << " after " << (result.curve.size() ? result.curve.size() - 1 : 0)
        << " epochs, loss " << final_loss << "\n";
  return result.diverged ? kDivergence : kOk;
}

// approx ---------------------------------------------------------------------

struct ApproxArgs {
  std::string function;
  std::string table;
  std::optional<double> L;
  double p = 1.0;
  double epsilon = 0.5;
  int d_x = 1;
  int d_y = 1;
  long grid_points = 100000;
};

SampleOracle table_oracle(Run& run, const std::string& path, int d_x, int d_y) {
  run.inputs.push_back(path);
  json t;
  try {
    t = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Failure{kInput, path + ": " + e.what()};
  }
  const auto pts = get_or<std::vector<std::vector<double>>>(t, "points", {});
  const auto vals = get_or<std::vector<std::vector<double>>>(t, "values", {});
  if (pts.size() != vals.size()) throw Failure{kInput, path + ": points and values differ in length"};
  auto table = std::make_shared<std::vector<std::pair<Vector, Vector>>>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (static_cast<int>(pts[i].size()) != d_x || static_cast<int>(vals[i].size()) != d_y)
      throw Failure{kInput, path + ": entry " + std::to_string(i) + " has the wrong dimension"};
    table->emplace_back(Eigen::Map<const Vector>(pts[i].data(), d_x),
                        Eigen::Map<const Vector>(vals[i].data(), d_y));
  }
  return [table](const Vector& x) -> Vector {
    for (const auto& [p, v] : *table)
      if ((p - x).cwiseAbs().maxCoeff() <= 1e-9) return v;
    std::ostringstream msg;
    msg << "table does not cover anchor point (" << x.transpose() << ")";
    throw Failure{kInput, msg.str()};
  };
}

int cmd_approx(Run& run, const ApproxArgs& a, const fs::path& out_dir, bool as_json, std::ostream& out) {
  if (a.function.empty() == a.table.empty()) throw Failure{kInput, "give exactly one of --function, --table"};
  SampleOracle oracle;
  std::function<Vector(const Vector&)> truth;
  double L = a.L.value_or(1.0);
  if (!a.function.empty()) {
    auto tf = test_function(a.function, a.d_x);
    if (!tf) throw Failure{kInput, "unknown test function '" + a.function + "'"};
    if (a.d_y != 1) throw Failure{kInput, "analytic test functions are scalar (d_y = 1)"};
    if (!a.L) L = tf->lipschitz;
    oracle = [f = tf->f](const Vector& x) { return Vector::Constant(1, f(x)); };
  } else {
    if (!a.L) throw Failure{kInput, "--L is required with --table"};
    oracle = table_oracle(run, a.table, a.d_x, a.d_y);
  }
  LipschitzPlan plan;
  Network net(a.d_x, {});
  try {
    plan = make_lipschitz_plan(a.d_x, a.d_y, L, a.p, a.epsilon);
    net = lipschitz_approximator(oracle, plan);
  } catch (const ResourceError& e) {
    throw Failure{kConstruction, e.what()};
  } catch (const ConfigError& e) {
    throw Failure{kInput, e.what()};
  }
  json report{{"architecture", architecture_of(net).to_string()},
              {"delta", plan.delta},
              {"n_cubes", plan.n_cubes},
              {"cube_shell_r", plan.cube_shell_r},
              {"target_eps", plan.target_eps},
              {"p", plan.norm_p},
              {"L", plan.lipschitz_L}};
  if (!a.function.empty()) {
    const double err = riemann_lp_error(net, oracle, a.d_x, a.p, a.grid_points, plan.cube_shell_r);
    report["lp_error"] = err;
    report["within_target"] = err < plan.target_eps;
  }
  emit(run, out_dir / "network.json", serialize(net));
  emit(run, out_dir / "approx_report.json", report.dump(2) + "\n");
  write_manifest(run, out_dir);
  if (as_json) {
    out << report.dump(2) << "\n";
  } else {
    out << "built " << report["architecture"].get<std::string>() << " with n = " << plan.n_cubes << " cubes";
    if (report.contains("lp_error")) out << ", measured L^" << a.p << " error " << report["lp_error"].get<double>();
    out << "\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthesize, verify and train indicator networks", "polynet"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  bool as_json = false;
  std::string out_dir = ".";
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "random seed");
    sub->add_flag("--json", as_json, "machine-readable output");
    sub->add_option("--out", out_dir, "output directory");
  };

  BuildArgs build;
  auto* b = app.add_subcommand("build", "build an indicator network from a geometry file");
  b->add_option("geometry,--geometry", build.geometry, "geometry file")->required();
  b->add_option("--epsilon", build.epsilon, "shell width");
  b->add_option("--variant", build.variant, "auto|union|difference|complex|cuboid|pure_relu|sigmoid_head");
  b->add_option("--delta", build.delta, "sigmoid head tolerance");
  b->add_option("--inner-shell", build.inner_shell, "shell width of negative gates");
  common(b);

  BoundArgs bound;
  auto* bd = app.add_subcommand("bound", "width bounds from a complex or Betti numbers");
  bd->add_option("--geometry", bound.geometry, "complex or cuboid_holes geometry");
  bd->add_option("--histogram", bound.histogram, "facet counts k_0,k_1,...");
  bd->add_option("--betti", bound.betti, "Betti numbers b_0,...,b_d");
  bd->add_option("--dim", bound.dim, "ambient dimension");
  common(bd);

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "check a network against a geometry");
  v->add_option("--network", verify.network, "network file")->required();
  v->add_option("--geometry", verify.geometry, "geometry file")->required();
  v->add_option("--epsilon", verify.epsilon, "shell width");
  v->add_option("--p", verify.p, "L^p exponent");
  v->add_option("--samples", verify.samples, "total stratified samples");
  v->add_option("--inner-shell", verify.inner_shell, "clearance around negatives");
  common(v);

  TrainArgs trainer;
  auto* t = app.add_subcommand("train", "gradient descent on a lattice dataset");
  t->add_option("--config", trainer.config, "training config file")->required();
  t->add_option("--geometry", trainer.geometry, "geometry file");
  t->add_option("--resolution", trainer.resolution, "lattice points per axis");
  t->add_option("--manual", trainer.manual, "network file for manual initialization");
  common(t);

  ApproxArgs approx;
  auto* ap = app.add_subcommand("approx", "Riemann-sum approximation of a Lipschitz function");
  ap->add_option("--function", approx.function, "hat|pyramid|plateau|product|zero");
  ap->add_option("--table", approx.table, "function table file");
  ap->add_option("--L", approx.L, "Lipschitz constant");
  ap->add_option("--p", approx.p, "L^p exponent");
  ap->add_option("--epsilon", approx.epsilon, "target accuracy");
  ap->add_option("--dx", approx.d_x, "input dimension");
  ap->add_option("--dy", approx.d_y, "output dimension");
  ap->add_option("--grid-points", approx.grid_points, "Riemann grid size for the error");
  common(ap);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  Run run;
  run.args = args;
  run.seed = seed;
  auto* sub = app.get_subcommands().front();
  run.command = sub->get_name();
  std::optional<std::uint64_t> seed_flag;
  if (sub->count("--seed")) seed_flag = seed;
  try {
    if (sub == b) return cmd_build(run, build, out_dir, as_json, out);
    if (sub == bd) return cmd_bound(run, bound, as_json, out);
    if (sub == v) return cmd_verify(run, verify, out_dir, as_json, out);
    if (sub == t) return cmd_train(run, trainer, seed_flag, out_dir, as_json, out);
    return cmd_approx(run, approx, out_dir, as_json, out);
  } catch (const Failure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInput;
  }
}

}  // namespace polynet::cli
