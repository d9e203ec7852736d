#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "form_io.hpp"
#include "g2/cycles.hpp"
#include "g2/jacobian.hpp"
#include "g2/moduli.hpp"
#include "g2/verify.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

// Human-readable summary; moves to stderr when the JSON report goes to stdout.
std::ostream* human = &std::cout;

enum Exit { kPass = 0, kCheckFailure = 1, kUsage = 2 };

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json conventions() {
  return {{"orientation_sign", g2::orientation_sign()},
          {"orientation_class", g2::orientation_sign() < 0 ? "-e1234567" : "+e1234567"},
          {"phi0", "e123 + e145 + e167 + e246 - e257 - e347 - e356"},
          {"inner_product", "1/k! sum over all index tuples"}};
}

json config_json(const g2::RunConfig& cfg) {
  return {{"seed", cfg.seed},
          {"samples", cfg.samples},
          {"tol", cfg.tol > 0 ? number(cfg.tol) : json("default")},
          {"fd_step", cfg.fd_step > 0 ? number(cfg.fd_step) : json("default")},
          {"mode", cfg.exact ? "exact" : "float"}};
}

json suite_json(const g2::SuiteReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"status", g2::status_name(c.status)},
                      {"value", number(c.value)},
                      {"tolerance", number(c.tolerance)},
                      {"anchor", c.anchor},
                      {"criterion", c.criterion},
                      {"detail", c.detail}});
  json series = json::object();
  for (const auto& [name, values] : r.series) {
    json v = json::array();
    for (double x : values) v.push_back(number(x));
    series[name] = v;
  }
  return {{"suite", r.suite},
          {"status", r.passed() ? "pass" : "fail"},
          {"checks", checks},
          {"diagnostics", r.diagnostics},
          {"series", series}};
}

void print_suite(const g2::SuiteReport& r) {
  (*human) << "== " << r.suite << " ==\n";
  for (const auto& c : r.checks) {
    (*human) << "  [" << g2::status_name(c.status) << "] " << c.name << "  value=" << c.value;
    if (c.status != g2::CheckStatus::measured) (*human) << " tol=" << c.tolerance;
    (*human) << "  (" << c.anchor << ")";
    if (!c.detail.empty()) (*human) << "  " << c.detail;
    (*human) << "\n";
  }
  for (const auto& d : r.diagnostics) (*human) << "  note: " << d << "\n";
  (*human) << "  " << (r.passed() ? "PASS" : "FAIL") << "\n";
}

// Anchors cited by a report must come from the fixed list.
std::vector<std::string> unknown_anchors(const std::vector<g2::SuiteReport>& reports) {
  const auto& list = g2::anchor_list();
  std::set<std::string> known(list.begin(), list.end());
  std::vector<std::string> bad;
  for (const auto& r : reports)
    for (const auto& c : r.checks)
      if (!known.count(c.anchor)) bad.push_back(c.name + " -> " + c.anchor);
  return bad;
}

struct Output {
  std::string json_path;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
  std::time_t wall = std::time(nullptr);

  void write(json doc) const {
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&wall));
    doc["timestamp"] = {{"started", stamp}, {"elapsed_seconds", elapsed}};
    if (json_path.empty()) return;
    if (json_path == "-") {
      std::cout << doc.dump(2) << "\n";
      return;
    }
    std::ofstream out(json_path);
    if (!out) throw g2::Error("cannot write " + json_path);
    out << doc.dump(2) << "\n";
  }
};

json header(const std::string& command, const g2::RunConfig& cfg) {
  return {{"schema_version", kSchemaVersion}, {"command", command}, {"config", config_json(cfg)}, {"conventions", conventions()}};
}

int run_suites(const std::string& command, const std::vector<g2::SuiteReport>& reports, const g2::RunConfig& cfg,
               const Output& out) {
  json doc = header(command, cfg);
  bool ok = true;
  json suites = json::array();
  for (const auto& r : reports) {
    print_suite(r);
    suites.push_back(suite_json(r));
    ok = ok && r.passed();
  }
  auto bad = unknown_anchors(reports);
  for (const auto& b : bad) (*human) << "unknown anchor: " << b << "\n";
  ok = ok && bad.empty();
  doc["suites"] = suites;
  doc["status"] = ok ? "pass" : "fail";
  out.write(doc);
  (*human) << (ok ? "overall: PASS" : "overall: FAIL") << "\n";
  return ok ? kPass : kCheckFailure;
}

int cmd_verify(const std::string& target, const g2::RunConfig& cfg, const Output& out) {
  std::vector<g2::SuiteReport> reports;
  if (target == "algebra" || target == "all") reports.push_back(g2::verify_algebra(cfg));
  if (target == "moduli" || target == "all") reports.push_back(g2::verify_moduli(cfg));
  if (target == "jacobian" || target == "all") reports.push_back(g2::verify_jacobian(cfg));
  if (target == "cycles" || target == "all") reports.push_back(g2::verify_cycles(cfg));
  return run_suites("verify " + target, reports, cfg, out);
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

json point_report(const g2::KForm& phi, const std::string& source, const std::string* exact_volume) {
  g2::FlatChart chart = g2::make_chart(phi);
  g2::ModuliPoint p = g2::chart_center(chart);
  const g2::G2Structure& fs = p.fs;

  g2::HessianData h = g2::hessian_G(chart, p);
  g2::LegendreData leg = g2::legendre(chart, p);
  g2::JacobianLattice lattice = g2::jacobian_lattice(fs);

  std::vector<int> sector = chart.sector_1_27();
  Eigen::MatrixXd yuk(sector.size(), sector.size());
  for (size_t i = 0; i < sector.size(); ++i)
    for (size_t j = 0; j < sector.size(); ++j)
      yuk(i, j) = g2::yukawa(fs, fs.phi(), chart.basis[sector[i]], chart.basis[sector[j]]);

  const int n = 70;
  Eigen::MatrixXd J = g2::J_matrix(fs), W = g2::omega_matrix(), G = g2::gJ_matrix(fs);
  Eigen::MatrixXd Jt = g2::J_tilde_matrix(), Wt = g2::omega_tilde_matrix(fs), Gt = g2::gJ_tilde_matrix(fs);
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

  json spectrum = json::array();
  for (int i = 0; i < h.eigenvalues.size(); ++i) spectrum.push_back(h.eigenvalues[i]);
  json grad = json::array();
  for (double g : h.gradient) grad.push_back(g);

  json out = {{"source", source},
              {"phi", g2kit::form_to_json(phi)},
              {"volume", fs.vol()[0] * g2::orientation_sign()},
              {"f", g2::superpotential(p)},
              {"fhat", leg.fhat},
              {"fhat_over_f", leg.fhat / leg.f},
              {"gradient", grad},
              {"hessian",
               {{"signature", {h.signature.positive, h.signature.negative}},
                {"zero_eigenvalues", h.signature.zero},
                {"spectrum", spectrum}}},
              {"yukawa_slice",
               {{"basis", "phi, then g-orthonormal type-27 forms"},
                {"phi_phi_phi_over_f", yuk(0, 0) / g2::superpotential(p)},
                {"matrix", matrix_json(yuk)}}},
              {"lattice_covolume", lattice.covolume},
              {"pseudo_kahler",
               {{"J_squared_residual", max_abs(J * J + I)},
                {"compatibility_residual", max_abs(G - W * J)},
                {"J_tilde_squared_residual", max_abs(Jt * Jt + I)},
                {"compatibility_tilde_residual", max_abs(Gt - Wt * Jt)}}}};
  if (exact_volume) out["exact_volume"] = *exact_volume;
  return out;
}

int cmd_report_point(const std::string& source, const std::string& path, const g2::RunConfig& cfg, const Output& out) {
  g2::KForm phi(3);
  std::string exact_volume;
  if (source == "standard") {
    phi = g2::standard_phi<double>();
  } else if (source == "random") {
    std::mt19937_64 rng(cfg.seed);
    phi = g2::random_positive_phi(rng, 0.25);
  } else {
    g2kit::FormFile file = g2kit::load_form(path);
    phi = file.value;
    if (cfg.exact) {
      try {
        g2::QG2Structure q = g2::metric_from_phi(file.rational);
        exact_volume = g2::to_string(q.vol()[0] * g2::orientation_sign());
      } catch (const g2::InexactValue&) {
        exact_volume = "irrational";
      }
    }
  }
  json doc = header("report-point " + source, cfg);
  doc["point"] = point_report(phi, source, exact_volume.empty() ? nullptr : &exact_volume);
  const json& pt = doc["point"];
  (*human) << "f = " << pt["f"].get<double>() << "\nfhat = " << pt["fhat"].get<double>()
            << "\nsignature = (" << pt["hessian"]["signature"][0] << "," << pt["hessian"]["signature"][1] << ")"
            << "\ncovolume = " << pt["lattice_covolume"].get<double>() << "\n";
  if (!exact_volume.empty()) (*human) << "exact volume = " << exact_volume << "\n";
  doc["status"] = "pass";
  out.write(doc);
  return kPass;
}

int cmd_cycles(const std::string& demo, const g2::RunConfig& cfg, const Output& out) {
  return run_suites("cycles " + demo, {g2::cycles_demo(demo, cfg)}, cfg, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"g2kit: verification suites for G2-structures on the flat 7-torus"};
  app.require_subcommand(1);

  g2::RunConfig cfg;
  Output out;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "PRNG seed")->envname("G2BENCH_SEED");
    sub->add_option("--samples", cfg.samples, "random samples per check (minimums still apply)")
        ->envname("G2BENCH_SAMPLES")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol", cfg.tol, "tolerance for finite-difference checks")
        ->envname("G2BENCH_TOL")
        ->check(CLI::PositiveNumber);
    sub->add_option("--fd-step", cfg.fd_step, "finite-difference step")
        ->envname("G2BENCH_FD_STEP")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--exact", cfg.exact, "rational arithmetic where available")->envname("G2BENCH_EXACT");
    sub->add_option("--json", out.json_path, "write the JSON report to a path ('-' for stdout)")->envname("G2BENCH_JSON");
  };

  std::string target, source, path, demo;
  CLI::App* verify = app.add_subcommand("verify", "run invariant suites");
  verify->add_option("target", target)->required()->check(CLI::IsMember({"algebra", "moduli", "jacobian", "cycles", "all"}));
  add_common(verify);

  CLI::App* report = app.add_subcommand("report-point", "quantities at one positive 3-form");
  report->add_option("source", source)->required()->check(CLI::IsMember({"standard", "file", "random"}));
  report->add_option("path", path, "3-form JSON file for source 'file'");
  add_common(report);

  CLI::App* cycles = app.add_subcommand("cycles", "cycle witness and isotropy demos");
  cycles->add_option("demo", demo)->required()->check(CLI::IsMember({"assoc", "coassoc", "ddt", "aj"}));
  add_common(cycles);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }
  if (out.json_path == "-") human = &std::cerr;
  if (*report && source == "file" && path.empty()) {
    std::cerr << "report-point file needs a path\n";
    return kUsage;
  }

  try {
    if (*verify) return cmd_verify(target, cfg, out);
    if (*report) return cmd_report_point(source, path, cfg, out);
    return cmd_cycles(demo, cfg, out);
  } catch (const g2::NotPositive& e) {
    std::cerr << "error: " << e.what() << " (det B = " << e.det_b() << ")\n";
    return kUsage;
  } catch (const g2::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
