// divark: command-line front end for the divark library.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "divark/io.hpp"

namespace {

using divark::Complex;
using divark::Error;
using divark::ErrorCode;
using divark::io::Json;

enum Exit : int { kOk = 0, kInvalid = 2, kNumerical = 3, kNegative = 4 };

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::PreconditionFailed:
    case ErrorCode::NotHermitian:
    case ErrorCode::NotUnitary:
    case ErrorCode::EmptyVariety:
    case ErrorCode::NotRegular:
    case ErrorCode::RankDeficientSamples:
    case ErrorCode::UnimodularEigenvalue:
    case ErrorCode::NotPositiveDefinite:
      return kInvalid;
    case ErrorCode::CertificateViolation:
      return kNegative;
    default:
      return kNumerical;
  }
}

struct Options {
  std::string in;
  std::string out;
  std::string format = "json";
  bool no_timestamp = false;
  std::uint64_t seed = divark::kDefaultSeed;
  std::optional<std::size_t> grid;
  std::optional<double> tol_unitary, tol_psd, tol_membership, tol_rank, tol_bisect;

  // verb specific
  std::string poly, phi, phi1, phi2, query_diagonal;
  std::vector<std::string> query_z;
  std::size_t interior = 16;
  std::size_t trials = 100;
  std::optional<double> perturb;

  divark::Tolerances tolerances() const {
    divark::Tolerances t;
    if (tol_unitary) t.unitary_tol = *tol_unitary;
    if (tol_psd) t.psd_tol = *tol_psd;
    if (tol_membership) t.membership_tol = *tol_membership;
    if (tol_rank) t.rank_tol = *tol_rank;
    if (tol_bisect) t.bisect_tol = *tol_bisect;
    t.validate();
    return t;
  }

  std::size_t grid_or(std::size_t fallback) const { return grid.value_or(fallback); }
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json envelope(const std::string& kind, const Options& opt) {
  Json j;
  j["schema"] = divark::io::kSchemaVersion;
  j["kind"] = kind;
  if (!opt.no_timestamp) j["generated"] = utc_timestamp();
  const auto t = opt.tolerances();
  j["tolerances"] = {{"unitary", t.unitary_tol},
                     {"psd", t.psd_tol},
                     {"membership", t.membership_tol},
                     {"rank", t.rank_tol},
                     {"bisect", t.bisect_tol}};
  return j;
}

void require_json_format(const Options& opt) {
  if (opt.format != "json") {
    throw Error(ErrorCode::InvalidInput, "csv output is only available for trace");
  }
}

/// "re" or "re,im".
Complex parse_complex(const std::string& text) {
  const auto comma = text.find(',');
  try {
    std::size_t used = 0;
    const double re = std::stod(text.substr(0, comma), &used);
    if (comma == std::string::npos) {
      if (used != text.size()) throw std::invalid_argument(text);
      return {re, 0.0};
    }
    const std::string rest = text.substr(comma + 1);
    const double im = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
    return {re, im};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidInput, "cannot parse complex number '" + text + "'");
  }
}

/// "a:b:step" -> a, a + step, ... up to b.
std::vector<double> parse_range(const std::string& text) {
  double v[3];
  std::size_t start = 0;
  for (int k = 0; k < 3; ++k) {
    const auto colon = text.find(':', start);
    if ((k < 2) == (colon == std::string::npos)) {
      throw Error(ErrorCode::InvalidInput, "expected a:b:step, got '" + text + "'");
    }
    try {
      v[k] = std::stod(text.substr(start, colon - start));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidInput, "expected a:b:step, got '" + text + "'");
    }
    start = colon + 1;
  }
  if (!(v[2] > 0.0) || !(v[1] >= v[0])) {
    throw Error(ErrorCode::InvalidInput, "range needs step > 0 and b >= a");
  }
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double t = v[0] + k * v[2];
    if (t > v[1] + 1e-12 * (1.0 + std::abs(v[1]))) break;
    out.push_back(t);
  }
  return out;
}

std::vector<Complex> parse_points(const std::vector<std::string>& texts) {
  std::vector<Complex> out;
  for (const auto& t : texts) out.push_back(parse_complex(t));
  return out;
}

struct Outcome {
  std::string content;
  int code = kOk;
};

Outcome json_outcome(const Json& j, int code = kOk) { return {divark::io::dump(j), code}; }

Json audit_json(const divark::DistinguishedAudit& a) {
  return {{"is_distinguished", a.is_distinguished},
          {"worst_interior_modulus", a.worst_interior_modulus},
          {"worst_boundary_deviation", a.worst_boundary_deviation}};
}

// Verbs

Outcome run_realize(const Options& opt) {
  require_json_format(opt);
  const auto tol = opt.tolerances();
  const auto col = divark::io::read_colligation(divark::io::load_json(opt.in), tol);
  Json j = envelope("realize-report", opt);
  j["colligation"] = divark::io::to_json(col);
  j["unitarity_defect"] = divark::unitarity_defect(col.unitary());
  const auto purity = divark::purity_report(col, divark::interior_grid(16), tol);
  j["purity"] = {{"norm_A", purity.norm_A},
                 {"ker_C_dim", purity.ker_C_dim},
                 {"constant_unimodular_sheet", purity.constant_unimodular_sheet}};
  j["flip"] = divark::io::to_json(divark::flip(col));
  Json samples = Json::array();
  for (Complex z : parse_points(opt.query_z)) {
    if (!(std::abs(z) < 1.0)) throw Error(ErrorCode::InvalidInput, "query z outside the disk");
    const auto s = divark::eval_transfer(col, z);
    samples.push_back({{"z", divark::io::to_json(z)},
                       {"psi", divark::io::to_json(s.psi)},
                       {"eigenvalues", divark::io::to_json(divark::general_eig(s.psi))},
                       {"defect_residual", s.defect_residual}});
  }
  j["samples"] = std::move(samples);
  return json_outcome(j);
}

Outcome run_trace(const Options& opt) {
  if (opt.format != "json" && opt.format != "csv") {
    throw Error(ErrorCode::InvalidInput, "format must be csv or json");
  }
  const auto tol = opt.tolerances();
  const divark::VarietyRealization v(divark::io::read_colligation(divark::io::load_json(opt.in), tol),
                                     tol);
  const auto trace = divark::boundary_trace(v, opt.grid_or(256));
  if (opt.format == "csv") return {divark::io::trace_csv(trace), kOk};
  Json j = envelope("trace", opt);
  j["trace"] = divark::io::to_json(trace);
  return json_outcome(j);
}

Outcome run_audit(const Options& opt) {
  require_json_format(opt);
  const auto tol = opt.tolerances();
  const divark::VarietyRealization v(divark::io::read_colligation(divark::io::load_json(opt.in), tol),
                                     tol);
  const std::size_t g = opt.grid_or(256);
  const auto audit = divark::audit_distinguished(v, opt.interior, g);
  Json j = envelope("audit-report", opt);
  j["grid"] = g;
  j["interior_grid"] = opt.interior;
  j["audit"] = audit_json(audit);
  return json_outcome(j, audit.is_distinguished ? kOk : kNegative);
}

Outcome run_zeroes(const Options& opt) {
  require_json_format(opt);
  if (opt.phi.empty()) throw Error(ErrorCode::InvalidInput, "--phi is required");
  const auto tol = opt.tolerances();
  const divark::VarietyRealization v(divark::io::read_colligation(divark::io::load_json(opt.in), tol),
                                     tol);
  const auto phi = divark::io::read_rational_inner(divark::io::load_json(opt.phi));
  const std::size_t g = opt.grid_or(256);
  const long count = divark::count_zeroes(v, phi, g);
  Json j = envelope("zeroes-report", opt);
  j["grid"] = g;
  j["phi"] = divark::io::to_json(phi);
  j["count"] = count;
  return json_outcome(j);
}

Outcome run_inner_pair(const Options& opt) {
  require_json_format(opt);
  const auto tol = opt.tolerances();
  std::optional<divark::BlaschkeProduct> phi1, phi2;
  if (!opt.in.empty()) {
    const Json doc = divark::io::load_json(opt.in);
    divark::io::check_version(doc);
    phi1 = divark::io::read_blaschke(divark::io::field(doc, "phi1"));
    phi2 = divark::io::read_blaschke(divark::io::field(doc, "phi2"));
  }
  if (!opt.phi1.empty()) phi1 = divark::io::read_blaschke(divark::io::load_json(opt.phi1));
  if (!opt.phi2.empty()) phi2 = divark::io::read_blaschke(divark::io::load_json(opt.phi2));
  if (!phi1 || !phi2) throw Error(ErrorCode::InvalidInput, "need both inner functions");
  const auto col = divark::colligation_from_inner_pair(*phi1, *phi2, tol);
  const divark::VarietyRealization v(col, tol);
  std::mt19937_64 rng(opt.seed);
  const double residual = divark::verify_pair_on_variety(*phi1, *phi2, v, opt.trials, rng);
  const std::size_t g = opt.grid_or(256);
  const auto audit = divark::audit_distinguished(v, opt.interior, g);
  Json j = envelope("inner-pair-report", opt);
  j["phi1"] = divark::io::to_json(*phi1);
  j["phi2"] = divark::io::to_json(*phi2);
  j["colligation"] = divark::io::to_json(col);
  j["seed"] = opt.seed;
  j["trials"] = opt.trials;
  j["max_residual"] = residual;
  j["grid"] = g;
  j["audit"] = audit_json(audit);
  const bool ok = audit.is_distinguished && residual <= tol.membership_tol;
  return json_outcome(j, ok ? kOk : kNegative);
}

Outcome run_ando(const Options& opt) {
  require_json_format(opt);
  if (opt.poly.empty()) throw Error(ErrorCode::InvalidInput, "--poly is required");
  const auto tol = opt.tolerances();
  const auto input = divark::io::read_pair(divark::io::load_json(opt.in));
  const auto p = divark::io::read_polynomial(divark::io::load_json(opt.poly));
  divark::CommutingPair pair = input;
  double moved = 0.0;
  if (opt.perturb) {
    pair = divark::perturb_to_generic(input, *opt.perturb, opt.seed);
    moved = std::max(divark::operator_norm(pair.t1() - input.t1()),
                     divark::operator_norm(pair.t2() - input.t2()));
  }
  const std::size_t g = opt.grid_or(1024);
  const auto pl = divark::build_ando_pipeline(pair, g, tol, opt.seed);
  auto cert = divark::evaluate_certificate(pl, p);
  cert.perturbation = moved;
  const bool holds = divark::certificate_holds(cert);

  Json j = envelope("ando-report", opt);
  j["seed"] = opt.seed;
  j["pair"] = divark::io::to_json(pair);
  j["spectral"] = {{"eigvals1", divark::io::to_json(pl.spectral.eigvals1)},
                   {"eigvals2", divark::io::to_json(pl.spectral.eigvals2)},
                   {"basis_condition", pl.spectral.basis_condition}};
  j["defect_dims"] = {pl.defects.d1, pl.defects.d2};
  j["colligation"] = divark::io::to_json(pl.colligation);
  j["certificate"] = {{"p", divark::io::to_json(cert.p)},
                      {"lhs", cert.lhs},
                      {"rhs_variety", cert.rhs_variety},
                      {"rhs_bidisk", cert.rhs_bidisk},
                      {"margin", cert.margin},
                      {"slack", cert.slack},
                      {"grid", cert.grid},
                      {"max_node_residual", cert.max_node_residual},
                      {"nodes_in_variety", cert.nodes_in_variety},
                      {"perturbation", cert.perturbation},
                      {"holds", holds}};
  return json_outcome(j, holds ? kOk : kNegative);
}

Outcome run_pick(const Options& opt) {
  require_json_format(opt);
  const auto tol = opt.tolerances();
  const auto prob = divark::io::read_problem(divark::io::load_json(opt.in));
  std::vector<divark::Node> queries;
  if (!opt.query_diagonal.empty()) {
    for (double t : parse_range(opt.query_diagonal)) queries.push_back({Complex(t), Complex(t)});
  }
  const auto query_z = parse_points(opt.query_z);

  Json j = envelope("pick-report", opt);
  j["problem"] = divark::io::to_json(prob);
  const auto rep = divark::check_solvable(prob, tol);
  const bool extremal = divark::is_extremal(rep.rho, tol);
  j["rho"] = rep.rho;
  j["solvable"] = rep.solvable;
  j["extremal"] = extremal;
  if (rep.decomposition) {
    j["decomposition"] = {{"gamma1", divark::io::to_json(rep.decomposition->gamma1)},
                          {"gamma2", divark::io::to_json(rep.decomposition->gamma2)},
                          {"identity_residual", rep.decomposition->identity_residual}};
  }
  if (rep.adversarial) {
    j["adversarial_kernel"] = {{"K", divark::io::to_json(rep.adversarial->k)},
                               {"min_eigenvalue", rep.adversarial_min_eigenvalue}};
  }
  if (!rep.solvable) return json_outcome(j, kNegative);
  if (!extremal) {
    if (!queries.empty() || !query_z.empty()) {
      throw Error(ErrorCode::PreconditionFailed, "queries need an extremal problem");
    }
    return json_outcome(j);
  }

  const auto ak = divark::find_active_kernel(prob, tol);
  j["active_kernel"] = {{"K", divark::io::to_json(ak.kernel.k)},
                        {"gamma", divark::io::to_json(ak.gamma)},
                        {"slack", ak.slack},
                        {"null_residual", ak.null_residual}};
  const auto minimal = divark::check_minimal(prob, tol);
  j["minimal"] = minimal.minimal;
  j["subproblem_rho"] = minimal.subproblem_rho;
  const auto ek = divark::extend_kernel(ak, prob, tol);
  j["colligation"] = divark::io::to_json(ek.colligation());
  j["restriction_residual"] = ek.restriction_residual();

  for (Complex z : query_z) {
    if (!(std::abs(z) < 1.0)) throw Error(ErrorCode::InvalidInput, "query z outside the disk");
    for (Complex w : divark::fibers_over_z(ek.variety(), z)) {
      if (std::abs(w) < 1.0) queries.push_back({z, w});
    }
  }
  Json table = Json::array();
  for (const auto& q : queries) {
    Json row = {{"z", divark::io::to_json(q[0])}, {"w", divark::io::to_json(q[1])}};
    try {
      const auto u = divark::uniqueness_value(ek, ak.gamma, q);
      row["value"] = divark::io::to_json(u.value);
      row["numerator"] = divark::io::to_json(u.numerator);
      row["denominator"] = divark::io::to_json(u.denominator);
    } catch (const Error& e) {
      row["error"] = std::string(divark::to_string(e.code()));
    }
    table.push_back(std::move(row));
  }
  j["queries"] = std::move(table);
  return json_outcome(j);
}

void check_threads_env() {
  const char* env = std::getenv("DIVARK_THREADS");
  if (env == nullptr) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || n < 1) {
    throw Error(ErrorCode::InvalidInput, "DIVARK_THREADS must be a positive integer");
  }
}

void add_common(CLI::App* cmd, Options& opt, bool needs_in) {
  auto* in = cmd->add_option("--in", opt.in, "input JSON file")->check(CLI::ExistingFile);
  if (needs_in) in->required();
  cmd->add_option("--out", opt.out, "output file (default: standard output)");
  cmd->add_option("--format", opt.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_flag("--no-timestamp", opt.no_timestamp, "omit the generation time");
  cmd->add_option("--seed", opt.seed, "random seed");
  cmd->add_option("--grid", opt.grid, "boundary grid size")->check(CLI::PositiveNumber);
  cmd->add_option("--tol-unitary", opt.tol_unitary)->check(CLI::PositiveNumber);
  cmd->add_option("--tol-psd", opt.tol_psd)->check(CLI::PositiveNumber);
  cmd->add_option("--tol-membership", opt.tol_membership)->check(CLI::PositiveNumber);
  cmd->add_option("--tol-rank", opt.tol_rank)->check(CLI::PositiveNumber);
  cmd->add_option("--tol-bisect", opt.tol_bisect)->check(CLI::PositiveNumber);
}

void report_error(std::string_view code, const std::string& message) {
  std::cerr << "error: " << code << ": " << message << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distinguished varieties, transfer functions and Pick interpolation on the bidisk"};
  app.require_subcommand(1);
  Options opt;

  auto* realize = app.add_subcommand("realize", "report on a colligation and its transfer function");
  add_common(realize, opt, true);
  realize->add_option("--query-z", opt.query_z, "points z as re or re,im");

  auto* trace = app.add_subcommand("trace", "boundary trace of the variety of a colligation");
  add_common(trace, opt, true);

  auto* audit = app.add_subcommand("audit", "check that the variety is distinguished");
  add_common(audit, opt, true);
  audit->add_option("--interior", opt.interior, "interior grid size")->check(CLI::Range(16, 4096));

  auto* zeroes = app.add_subcommand("zeroes", "count zeroes of a rational inner function on V");
  add_common(zeroes, opt, true);
  zeroes->add_option("--phi", opt.phi, "rational inner function JSON")->check(CLI::ExistingFile);

  auto* inner = app.add_subcommand("inner-pair", "variety of a pair of Blaschke products");
  add_common(inner, opt, false);
  inner->add_option("--phi1", opt.phi1, "Blaschke product JSON")->check(CLI::ExistingFile);
  inner->add_option("--phi2", opt.phi2, "Blaschke product JSON")->check(CLI::ExistingFile);
  inner->add_option("--trials", opt.trials, "random points checked on V")
      ->check(CLI::Range(1, 100000));
  inner->add_option("--interior", opt.interior, "interior grid size")->check(CLI::Range(16, 4096));

  auto* ando = app.add_subcommand("ando", "sharpened von Neumann certificate for a commuting pair");
  add_common(ando, opt, true);
  ando->add_option("--poly", opt.poly, "polynomial JSON")->check(CLI::ExistingFile);
  ando->add_option("--perturb", opt.perturb, "move the pair to a generic one first (0 < eps <= 1e-2)");

  auto* pick = app.add_subcommand("pick", "Pick interpolation on the bidisk");
  add_common(pick, opt, true);
  pick->add_option("--query-diagonal", opt.query_diagonal, "query (t, t) for t in a:b:step");
  pick->add_option("--query-z", opt.query_z, "query every point of V over z (re or re,im)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("InvalidInput", e.what());
    return kInvalid;
  }

  try {
    check_threads_env();
    Outcome outcome;
    if (*realize) outcome = run_realize(opt);
    else if (*trace) outcome = run_trace(opt);
    else if (*audit) outcome = run_audit(opt);
    else if (*zeroes) outcome = run_zeroes(opt);
    else if (*inner) outcome = run_inner_pair(opt);
    else if (*ando) outcome = run_ando(opt);
    else outcome = run_pick(opt);
    divark::io::write_atomically(opt.out, outcome.content);
    if (outcome.code == kNegative) report_error("NegativeResult", "report written");
    return outcome.code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const divark::io::IoError& e) {
    report_error("IoError", e.what());
    return kNumerical;
  } catch (const Json::exception& e) {
    report_error("InvalidInput", e.what());
    return kInvalid;
  }
}
