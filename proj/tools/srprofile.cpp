// Command-line front end: one experiment per invocation, JSON summary on stdout and in output_dir.

#include <srprofile/ball_net.hpp>
#include <srprofile/cc_distance.hpp>
#include <srprofile/families.hpp>
#include <srprofile/gh.hpp>
#include <srprofile/lie_json.hpp>
#include <srprofile/profile.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace srprofile;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver     = 3;
constexpr int kExitIo         = 4;

struct ExperimentConfig
{
  std::string command;
  std::string geometry = "heisenberg";
  std::string geometry2;
  std::string params;
  bool isotropy = false;
  SolverConfig solver;
  std::vector<double> eps_grid;
  std::string output_dir = ".";
  std::string run_id     = "run";
  int threads            = 1;
  double net_h           = 0.1;
  double radius          = 1.0;
  std::string variant    = "ambient";
  bool anchors           = true;
  int pairs              = 10;
  std::vector<double> from, to, basepoint;
  std::string x_path, y_path;
};

json to_json(const ExperimentConfig& c)
{
  return {{"command", c.command},   {"geometry", c.geometry}, {"geometry2", c.geometry2}, {"params", c.params},
          {"isotropy", c.isotropy}, {"solver", srprofile::to_json(c.solver)}, {"eps_grid", c.eps_grid},
          {"output_dir", c.output_dir}, {"run_id", c.run_id}, {"threads", c.threads}, {"net_h", c.net_h},
          {"radius", c.radius},     {"variant", c.variant},   {"anchors", c.anchors},     {"pairs", c.pairs},
          {"from", c.from},         {"to", c.to},             {"basepoint", c.basepoint}, {"x", c.x_path},
          {"y", c.y_path}};
}

void apply_file(ExperimentConfig& c, const json& doc)
{
  if (!doc.is_object()) { throw Error(ErrorCode::InvalidConfig, "config file must hold a JSON object"); }
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "command") {
        if (v.get<std::string>() != c.command) {
          throw Error(ErrorCode::InvalidConfig, "config is for '" + v.get<std::string>() + "', not '" + c.command + "'");
        }
      }
      else if (key == "geometry") { c.geometry = v.get<std::string>(); }
      else if (key == "geometry2") { c.geometry2 = v.get<std::string>(); }
      else if (key == "params") { c.params = v.get<std::string>(); }
      else if (key == "isotropy") { c.isotropy = v.get<bool>(); }
      else if (key == "solver") { apply_json(c.solver, v); }
      else if (key == "eps_grid") { c.eps_grid = v.get<std::vector<double>>(); }
      else if (key == "output_dir") { c.output_dir = v.get<std::string>(); }
      else if (key == "run_id") { c.run_id = v.get<std::string>(); }
      else if (key == "threads") { c.threads = v.get<int>(); }
      else if (key == "net_h") { c.net_h = v.get<double>(); }
      else if (key == "radius") { c.radius = v.get<double>(); }
      else if (key == "variant") { c.variant = v.get<std::string>(); }
      else if (key == "anchors") { c.anchors = v.get<bool>(); }
      else if (key == "pairs") { c.pairs = v.get<int>(); }
      else if (key == "from") { c.from = v.get<std::vector<double>>(); }
      else if (key == "to") { c.to = v.get<std::vector<double>>(); }
      else if (key == "basepoint") { c.basepoint = v.get<std::vector<double>>(); }
      else if (key == "x") { c.x_path = v.get<std::string>(); }
      else if (key == "y") { c.y_path = v.get<std::string>(); }
      else { throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'"); }
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad config value: ") + ex.what());
  }
}

Vec to_vec(const std::vector<double>& v, int dim, const std::string& what)
{
  if (static_cast<int>(v.size()) != dim) {
    throw Error(ErrorCode::InvalidDimension, what + " needs " + std::to_string(dim) + " coordinates");
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), dim);
}

SubRiemannianGroup load_group(const std::string& name)
{
  for (auto n : catalog_names()) {
    if (name == n) { return make_group(name); }
  }
  if (fs::exists(name)) {
    auto [alg, g] = load_lie_algebra(name);
    return SubRiemannianGroup(std::move(alg), std::move(g));
  }
  std::string known;
  for (auto n : catalog_names()) { known += (known.empty() ? "" : ", ") + std::string(n); }
  throw Error(ErrorCode::UnknownCatalogEntry, "unknown geometry '" + name + "' (catalog: " + known + ", or a JSON file)");
}

ContactFamilyParams parse_params(const std::string& text, bool isotropy)
{
  ContactFamilyParams p;
  p.has_isotropy = isotropy;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) { throw Error(ErrorCode::InvalidConfig, "parameter '" + item + "' is not key=value"); }
    const std::string key = item.substr(0, eq);
    char* end = nullptr;
    const double v = std::strtod(item.c_str() + eq + 1, &end);
    if (end == item.c_str() + eq + 1 || *end != '\0') { throw Error(ErrorCode::InvalidConfig, "bad number in '" + item + "'"); }
    if (key == "a") { p.a = v; }
    else if (key == "b") { p.b = v; }
    else if (key == "c") { p.c = v; }
    else if (key == "e") { p.e = v; }
    else if (key == "A") { p.A = v; }
    else if (key == "B") { p.B = v; }
    else if (key == "C") { p.C = v; }
    else if (key == "D") { p.D = v; }
    else { throw Error(ErrorCode::InvalidConfig, "unknown parameter '" + key + "' (a, b, c, e, A, B, C, D)"); }
  }
  return p;
}

class Artifacts
{
public:
  explicit Artifacts(const ExperimentConfig& c) : dir_(c.output_dir)
  {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) { throw Error(ErrorCode::IoError, "cannot create output directory " + dir_.string() + ": " + ec.message()); }
  }

  template <class Writer>
  std::string write(const std::string& name, Writer&& writer)
  {
    std::ofstream out(dir_ / name);
    if (!out) { throw Error(ErrorCode::IoError, "cannot write " + (dir_ / name).string()); }
    writer(out);
    out.flush();
    if (!out) { throw Error(ErrorCode::IoError, "write failed for " + (dir_ / name).string()); }
    return name;
  }

private:
  fs::path dir_;
};

json run_jacobi(const ExperimentConfig& c)
{
  if (!c.params.empty()) {
    const auto p = parse_params(c.params, c.isotropy);
    json rel = json::array();
    for (const auto& r : contact_relations(p)) { rel.push_back({{"name", r.name}, {"residual", r.residual}}); }
    return {{"defect", jacobi_defect(contact_tensor(p))}, {"relations", rel}};
  }
  const auto G = load_group(c.geometry);
  return {{"defect", jacobi_defect(G.alg())}, {"dim", G.dim()}};
}

json run_classify(const ExperimentConfig& c)
{
  const auto p = c.params.empty() ? catalog_params(c.geometry) : parse_params(c.params, c.isotropy);
  json rel = json::array();
  for (const auto& r : contact_relations(p)) { rel.push_back({{"name", r.name}, {"residual", r.residual}}); }
  return {{"class", to_string(classify_contact(p))}, {"jacobi_defect", jacobi_defect(contact_tensor(p))}, {"relations", rel}};
}

json run_nilpotentize(const ExperimentConfig& c)
{
  const auto G = load_group(c.geometry);
  const auto N = nilpotentize(G.alg(), G.grading());
  return {{"algebra", to_json(N, G.grading())},
          {"step", nilpotency_step(N)},
          {"homogeneous_dimension", G.grading().homogeneous_dimension()}};
}

json run_ccdist(const ExperimentConfig& c)
{
  const auto G = load_group(c.geometry);
  const Vec x = c.from.empty() ? Vec(Vec::Zero(G.dim())) : to_vec(c.from, G.dim(), "--from");
  const Vec y = to_vec(c.to, G.dim(), "--to");
  const auto res = cc_distance(G, x, y, c.solver);
  return {{"distance", res.distance}, {"certificate", to_json(res.certificate)}};
}

json run_ballnet(const ExperimentConfig& c, Artifacts& out)
{
  const auto G = load_group(c.geometry);
  const Vec x = c.basepoint.empty() ? Vec(Vec::Zero(G.dim())) : to_vec(c.basepoint, G.dim(), "--basepoint");
  const auto X = ball_net(G, x, c.radius, c.net_h, c.solver);
  const auto file = out.write(c.run_id + "_ballnet.csv", [&](std::ostream& o) { write_csv(o, X); });
  return {{"points", X.size()}, {"diameter", X.diameter()}, {"files", {file}}};
}

json run_gh(const ExperimentConfig& c)
{
  if (c.x_path.empty() || c.y_path.empty()) { throw Error(ErrorCode::InvalidConfig, "gh needs --x and --y"); }
  const auto X = load_metric_space(c.x_path);
  const auto Y = load_metric_space(c.y_path);
  json r = to_json(gh_report(X, Y, c.solver));
  r["sizes"] = {X.size(), Y.size()};
  return r;
}

json run_profile(const ExperimentConfig& c, Artifacts& out)
{
  const auto G = load_group(c.geometry);
  const auto variant = parse_variant(c.variant);
  const Vec x = c.basepoint.empty() ? Vec(Vec::Zero(G.dim())) : to_vec(c.basepoint, G.dim(), "--basepoint");
  ProfileOptions opts;
  opts.net_h   = c.net_h;
  opts.threads = c.threads;
  std::optional<FiniteMetricSpace> limit;
  json files = json::array();
  if (!c.eps_grid.empty()) {
    limit = limit_profile(G, c.net_h, c.solver);
    if (c.anchors) { opts.anchors = limit->coords(); }
    files.push_back(out.write(c.run_id + "_limit.csv", [&](std::ostream& o) { write_csv(o, *limit); }));
  }
  auto sample = sample_profile(G, x, variant, c.eps_grid, c.solver, opts);
  for (std::size_t k = 0; k < sample.spaces.size(); ++k) {
    files.push_back(out.write(slice_file_name(c.run_id, variant, sample.eps_grid[k]),
                              [&](std::ostream& o) { write_csv(o, sample.spaces[k]); }));
  }
  std::optional<ProfileSample> other;
  if (!c.geometry2.empty()) { other = sample_profile(load_group(c.geometry2), x, variant, c.eps_grid, c.solver, opts); }
  const auto report = profile_report(std::move(sample), limit ? &*limit : nullptr, c.solver);
  json r = to_json(report);
  r["files"] = files;
  if (other) {
    const auto eq = curvature_equivalence(report.sample, *other, c.solver);
    r["equivalence"] = {{"verdict", to_string(eq.verdict)}, {"h", eq.h}, {"fit", to_json(eq.fit)}};
  }
  return r;
}

json run_rigidity(const ExperimentConfig& c, Artifacts& out)
{
  const auto G1 = load_group(c.geometry);
  const auto G2 = load_group(c.geometry2.empty() ? c.geometry : c.geometry2);
  if (c.pairs < 1) { throw Error(ErrorCode::InvalidConfig, "pairs must be >= 1"); }
  const auto pairs = rigidity_pairs(G1.dim(), c.pairs, c.solver.seed);
  const auto report = bracket_rigidity_scan(G1, G2, c.eps_grid, pairs, c.solver, c.threads);
  const auto file = out.write(c.run_id + "_rigidity.csv", [&](std::ostream& o) {
    o << "eps,delta,delta_over_eps2\n";
    for (const auto& row : report.rows) {
      o << format_double(row.eps) << ',' << format_double(row.delta) << ',' << format_double(row.normalized) << '\n';
    }
  });
  json r = to_json(report);
  r["files"] = {file};
  return r;
}

int exit_code(ErrorCode code)
{
  switch (code) {
    case ErrorCode::SolverFailed:
    case ErrorCode::BudgetExceeded: return kExitSolver;
    case ErrorCode::IoError: return kExitIo;
    default: return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Sub-Riemannian metric profile laboratory"};
  app.require_subcommand(1);

  ExperimentConfig flags;
  std::string config_path;
  std::string eps_text;

  struct Sub
  {
    CLI::App* app;
  };
  std::vector<Sub> subs;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; flags override it")->check(CLI::ExistingFile);
    sub->add_option("--geometry,-g", flags.geometry, "catalog name or Lie algebra JSON file");
    sub->add_option("--output-dir,-o", flags.output_dir, "artifact directory");
    sub->add_option("--run-id", flags.run_id, "artifact name prefix");
    sub->add_option("--threads", flags.threads, "worker cap")->check(CLI::Range(1, 64));
    sub->add_option("--seed", flags.solver.seed, "random seed (overrides SRPROFILE_SEED)");
    sub->add_option("--segments", flags.solver.segments);
    sub->add_option("--directions", flags.solver.directions);
    sub->add_option("--max-iter", flags.solver.max_iter);
    sub->add_option("--penalty-weight", flags.solver.penalty_weight);
    sub->add_option("--tol", flags.solver.tol);
    sub->add_option("--multistarts", flags.solver.multistarts);
    sub->add_option("--max-nodes", flags.solver.max_nodes);
    sub->add_option("--max-points", flags.solver.max_points);
    sub->add_option("--dedup-fraction", flags.solver.dedup_fraction);
    sub->add_option("--explore-factor", flags.solver.explore_factor);
    subs.push_back({sub});
  };

  auto* jacobi = app.add_subcommand("jacobi", "Jacobi defect of a geometry or contact parameters");
  auto* classify = app.add_subcommand("classify", "classify contact-family parameters");
  auto* nilp = app.add_subcommand("nilpotentize", "graded (tangent cone) algebra");
  auto* ccdist = app.add_subcommand("ccdist", "Carnot-Caratheodory distance with certificate");
  auto* ballnet = app.add_subcommand("ballnet", "net of a CC ball as a distance-matrix CSV");
  auto* gh = app.add_subcommand("gh", "Gromov-Hausdorff bounds between two finite metric spaces");
  auto* profile = app.add_subcommand("profile", "metric profile over an eps grid");
  auto* rigidity = app.add_subcommand("rigidity", "bracket rigidity scan between two groups");
  for (auto* s : {jacobi, classify, nilp, ccdist, ballnet, gh, profile, rigidity}) { add_common(s); }

  for (auto* s : {jacobi, classify}) {
    s->add_option("--params", flags.params, "contact parameters, e.g. e=1,a=0.3");
    s->add_flag("--isotropy", flags.isotropy, "4-dimensional family with isotropy X0");
  }
  ccdist->add_option("--from", flags.from, "start point")->delimiter(',');
  ccdist->add_option("--to", flags.to, "end point")->delimiter(',');
  for (auto* s : {ballnet, profile}) {
    s->add_option("--net-h", flags.net_h, "net step");
    s->add_option("--basepoint", flags.basepoint, "center")->delimiter(',');
  }
  ballnet->add_option("--radius", flags.radius);
  gh->add_option("--x", flags.x_path, "first space (.csv or .json)");
  gh->add_option("--y", flags.y_path, "second space (.csv or .json)");
  for (auto* s : {profile, rigidity}) { s->add_option("--eps", eps_text, "comma-separated decreasing eps grid"); }
  profile->add_option("--variant", flags.variant, "ambient, delta, Delta, Dg or limit");
  profile->add_option("--compare", flags.geometry2, "second geometry for a curvature-equivalence verdict");
  profile->add_flag("!--no-anchors", flags.anchors, "sample slices independently instead of over the limit net points");
  rigidity->add_option("--g1", flags.geometry, "first group");
  rigidity->add_option("--g2", flags.geometry2, "second group");
  rigidity->add_option("--pairs", flags.pairs, "number of seeded point pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    ExperimentConfig cfg;
    cfg.command = sub->get_name();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) { throw Error(ErrorCode::IoError, "cannot open " + config_path); }
      json doc;
      try {
        in >> doc;
      } catch (const json::exception& ex) {
        throw Error(ErrorCode::InvalidConfig, config_path + ": " + ex.what());
      }
      apply_file(cfg, doc);
    }
    if (const char* env = std::getenv("SRPROFILE_SEED")) {
      char* end = nullptr;
      const auto v = std::strtoull(env, &end, 10);
      if (end == env || *end != '\0') { throw Error(ErrorCode::InvalidConfig, "SRPROFILE_SEED must be an unsigned integer"); }
      cfg.solver.seed = v;
    }
    // Explicit flags win over the file and the environment.
    auto given = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };
    if (given("--geometry") || given("--g1")) { cfg.geometry = flags.geometry; }
    if (given("--g2") || given("--compare")) { cfg.geometry2 = flags.geometry2; }
    if (given("--params")) { cfg.params = flags.params; }
    if (given("--isotropy")) { cfg.isotropy = flags.isotropy; }
    if (given("--output-dir")) { cfg.output_dir = flags.output_dir; }
    if (given("--run-id")) { cfg.run_id = flags.run_id; }
    if (given("--threads")) { cfg.threads = flags.threads; }
    if (given("--seed")) { cfg.solver.seed = flags.solver.seed; }
    if (given("--segments")) { cfg.solver.segments = flags.solver.segments; }
    if (given("--directions")) { cfg.solver.directions = flags.solver.directions; }
    if (given("--max-iter")) { cfg.solver.max_iter = flags.solver.max_iter; }
    if (given("--penalty-weight")) { cfg.solver.penalty_weight = flags.solver.penalty_weight; }
    if (given("--tol")) { cfg.solver.tol = flags.solver.tol; }
    if (given("--multistarts")) { cfg.solver.multistarts = flags.solver.multistarts; }
    if (given("--max-nodes")) { cfg.solver.max_nodes = flags.solver.max_nodes; }
    if (given("--max-points")) { cfg.solver.max_points = flags.solver.max_points; }
    if (given("--dedup-fraction")) { cfg.solver.dedup_fraction = flags.solver.dedup_fraction; }
    if (given("--explore-factor")) { cfg.solver.explore_factor = flags.solver.explore_factor; }
    if (given("--from")) { cfg.from = flags.from; }
    if (given("--to")) { cfg.to = flags.to; }
    if (given("--net-h")) { cfg.net_h = flags.net_h; }
    if (given("--basepoint")) { cfg.basepoint = flags.basepoint; }
    if (given("--radius")) { cfg.radius = flags.radius; }
    if (given("--x")) { cfg.x_path = flags.x_path; }
    if (given("--y")) { cfg.y_path = flags.y_path; }
    if (given("--variant")) { cfg.variant = flags.variant; }
    if (given("--no-anchors")) { cfg.anchors = flags.anchors; }
    if (given("--pairs")) { cfg.pairs = flags.pairs; }
    if (given("--eps")) {
      cfg.eps_grid.clear();
      std::stringstream ss(eps_text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0') { throw Error(ErrorCode::InvalidConfig, "bad eps value '" + item + "'"); }
        cfg.eps_grid.push_back(v);
      }
    }
    if (cfg.run_id.empty()) { throw Error(ErrorCode::InvalidConfig, "run_id must be nonempty"); }
    if (cfg.threads < 1) { throw Error(ErrorCode::InvalidConfig, "threads must be >= 1"); }
    cfg.solver.validate();

    Artifacts out(cfg);
    json result;
    const auto& cmd = cfg.command;
    if (cmd == "jacobi") { result = run_jacobi(cfg); }
    else if (cmd == "classify") { result = run_classify(cfg); }
    else if (cmd == "nilpotentize") { result = run_nilpotentize(cfg); }
    else if (cmd == "ccdist") { result = run_ccdist(cfg); }
    else if (cmd == "ballnet") { result = run_ballnet(cfg, out); }
    else if (cmd == "gh") { result = run_gh(cfg); }
    else if (cmd == "profile") { result = run_profile(cfg, out); }
    else { result = run_rigidity(cfg, out); }

    const json summary{{"command", cmd}, {"config", to_json(cfg)}, {"result", result}};
    const std::string text = summary.dump(2) + "\n";
    out.write(cfg.run_id + "_" + cmd + ".json", [&](std::ostream& o) { o << text; });
    std::cout << text;
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}
