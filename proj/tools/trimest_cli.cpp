#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "trimest/bootstrap.hpp"
#include "trimest/csv.hpp"
#include "trimest/dgp.hpp"
#include "trimest/estimator.hpp"
#include "trimest/json_io.hpp"
#include "trimest/mc.hpp"
#include "trimest/variance.hpp"

namespace {

using nlohmann::json;
using namespace trimest;

json fit_result_json(const FitResult& r) {
  return json{{"theta_hat", vector_to_json(r.theta_hat)},
              {"objective_value", r.objective_value},
              {"converged", r.converged},
              {"iterations", r.iterations},
              {"final_grad_norm", r.final_grad_norm},
              {"flat", r.flat}};
}

json sandwich_json(const SandwichCovariance& s) {
  return json{{"bread", matrix_to_json(s.bread)},
              {"meat", matrix_to_json(s.meat)},
              {"sigma", matrix_to_json(s.sigma)}};
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << j.dump(2) << "\n";
  }
}

ParamVector parse_theta(const std::string& s) {
  return vector_from_json(json::parse(s));
}

int run(int argc, char** argv) {
  CLI::App app{"Trimmed least squares / least absolute deviations estimation "
               "for two-period censored panels"};
  app.require_subcommand(1);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit the trimmed estimator");
  std::string fit_data, fit_loss = "tls", fit_start, fit_out;
  FitConfig fit_cfg;
  fit_cmd->add_option("--data", fit_data, "panel CSV path")->required();
  fit_cmd->add_option("--loss", fit_loss, "tls|tlad");
  fit_cmd->add_option("--tol", fit_cfg.grad_tol, "gradient norm tolerance");
  fit_cmd->add_option("--step-tol", fit_cfg.step_tol, "step tolerance");
  fit_cmd->add_option("--max-iters", fit_cfg.max_iters, "iteration cap");
  fit_cmd->add_option("--restarts", fit_cfg.restarts, "tlad random restarts");
  fit_cmd->add_option("--start", fit_start, "initial theta as JSON array");
  fit_cmd->add_option("--out", fit_out, "output JSON path (default stdout)");

  // variance
  auto* var_cmd = app.add_subcommand("variance", "Plug-in sandwich covariance");
  std::string var_data, var_loss = "tls", var_bread = "midpoint", var_theta,
              var_out;
  bool var_fit = false;
  double var_zero_tol = 0.0;
  var_cmd->add_option("--data", var_data, "panel CSV path")->required();
  var_cmd->add_option("--loss", var_loss, "tls|tlad");
  var_cmd->add_option("--bread", var_bread, "midpoint|alt1|alt2|h92|all");
  var_cmd->add_option("--theta", var_theta, "evaluation point as JSON array");
  var_cmd->add_flag("--fit", var_fit, "fit theta first");
  var_cmd->add_option("--zero-tol", var_zero_tol,
                      "treat |dx'theta| <= tol as zero");
  var_cmd->add_option("--out", var_out, "output JSON path (default stdout)");

  // bootstrap
  auto* boot_cmd =
      app.add_subcommand("bootstrap", "Robust bootstrap covariance for TLAD");
  std::string boot_data, boot_out;
  BootstrapConfig boot_cfg;
  boot_cfg.threads = 4;
  boot_cmd->add_option("--data", boot_data, "panel CSV path")->required();
  boot_cmd->add_option("--b", boot_cfg.b, "bootstrap replications");
  boot_cmd->add_option("--seed", boot_cfg.seed, "rng seed");
  boot_cmd->add_option("--quantile-level", boot_cfg.quantile_level,
                       "quantile level on absolute deviations");
  boot_cmd->add_flag("--psd", boot_cfg.psd_project,
                     "project the estimate onto the PSD cone");
  boot_cmd->add_option("--threads", boot_cfg.threads, "worker threads");
  boot_cmd->add_option("--out", boot_out, "output JSON path (default stdout)");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Draw a panel from a DGP");
  std::string sim_dgp = "smooth", sim_out_path;
  int sim_n = 1000, sim_k = 1;
  std::uint64_t sim_seed = 0;
  std::string sim_theta0;
  double sim_rho = 0.0, sim_x_scale = 1.0, sim_alpha_scale = 0.0;
  double sim_x_base1 = 0.0, sim_x_base2 = 0.0;
  sim_cmd->add_option("--dgp", sim_dgp, "tls-ce|tlad-ce|smooth")->required();
  sim_cmd->add_option("--n", sim_n, "sample size")->required();
  sim_cmd->add_option("--seed", sim_seed, "rng seed");
  sim_cmd->add_option("--out", sim_out_path, "output CSV path")->required();
  sim_cmd->add_option("--k", sim_k, "regressor dimension (smooth)");
  sim_cmd->add_option("--theta0", sim_theta0, "true theta as JSON array (smooth)");
  sim_cmd->add_option("--rho", sim_rho, "error correlation (smooth)");
  sim_cmd->add_option("--x-scale", sim_x_scale, "regressor noise scale (smooth)");
  sim_cmd->add_option("--alpha-scale", sim_alpha_scale,
                      "fixed-effect scale (smooth)");
  sim_cmd->add_option("--x-base1", sim_x_base1, "period-1 base level (smooth)");
  sim_cmd->add_option("--x-base2", sim_x_base2, "period-2 base level (smooth)");

  // mc
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo experiment");
  std::string mc_config_path, mc_out_dir = ".";
  mc_cmd->add_option("--config", mc_config_path, "McConfig JSON path")
      ->required();
  mc_cmd->add_option("--out-dir", mc_out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (*fit_cmd) {
    const PanelDataset data = load_panel_csv(fit_data);
    if (!fit_start.empty()) fit_cfg.initial_theta = parse_theta(fit_start);
    const FitResult r = fit(data, loss_kind_from_string(fit_loss), fit_cfg);
    emit(fit_result_json(r), fit_out);
    return 0;
  }

  if (*var_cmd) {
    const PanelDataset data = load_panel_csv(var_data);
    const LossKind kind = loss_kind_from_string(var_loss);
    ParamVector theta;
    json j;
    if (var_fit || var_theta.empty()) {
      const FitResult r = fit(data, kind);
      theta = r.theta_hat;
      j["fit"] = fit_result_json(r);
    } else {
      theta = parse_theta(var_theta);
    }
    j["loss"] = var_loss;
    j["theta"] = vector_to_json(theta);
    if (kind == LossKind::TLAD) {
      j["meat"] = matrix_to_json(meat_tlad(data, theta));
      j["note"] =
          "bread/sigma omitted: use the bootstrap subcommand for TLAD "
          "covariance";
    } else {
      const Matrix meat = meat_tls(data, theta);
      auto one = [&](BreadVariant v) {
        return sandwich_json(
            sandwich(bread_tls(data, theta, v, var_zero_tol), meat));
      };
      if (var_bread == "all") {
        j["midpoint"] = one(BreadVariant::Midpoint);
        j["alt1"] = one(BreadVariant::Alt1);
        j["alt2"] = one(BreadVariant::Alt2);
        j["h92"] = one(BreadVariant::H92);
      } else {
        const BreadVariant v = bread_variant_from_string(var_bread);
        j["bread_variant"] = var_bread;
        j["sandwich"] = one(v);
        if (v == BreadVariant::H92) {
          const auto [l, r] = bread_h92_decompose(data, theta, var_zero_tol);
          j["h92_l"] = matrix_to_json(l);
          j["h92_r"] = matrix_to_json(r);
        }
      }
    }
    emit(j, var_out);
    return 0;
  }

  if (*boot_cmd) {
    const PanelDataset data = load_panel_csv(boot_data);
    const FitResult fr = fit(data, LossKind::TLAD, boot_cfg.fit_config);
    const RobustSigmaResult rs = robust_sigma_tlad(data, fr.theta_hat, boot_cfg);
    json j{{"theta_hat", vector_to_json(fr.theta_hat)},
           {"sigma_hat", matrix_to_json(rs.sigma_hat)},
           {"raw_quantiles",
            json{{"diag", vector_to_json(rs.diag_quantiles)},
                 {"cross", matrix_to_json(rs.cross_quantiles)}}},
           {"psd_projected", rs.psd_projected},
           {"replications_used", rs.replications_used},
           {"replications_dropped", rs.replications_dropped},
           {"tie_breaking", "first-minimizer"}};
    emit(j, boot_out);
    return 0;
  }

  if (*sim_cmd) {
    DgpSpec spec;
    spec.n = sim_n;
    if (sim_dgp == "tls-ce") {
      spec.law = TlsCounterexample{};
    } else if (sim_dgp == "tlad-ce") {
      spec.law = TladCounterexample{};
    } else if (sim_dgp == "smooth") {
      SmoothExchangeable s;
      s.k = sim_k;
      if (!sim_theta0.empty()) s.theta0 = parse_theta(sim_theta0);
      s.rho = sim_rho;
      s.x_scale = sim_x_scale;
      s.alpha_scale = sim_alpha_scale;
      s.x_base1 = sim_x_base1;
      s.x_base2 = sim_x_base2;
      spec.law = s;
    } else {
      throw std::invalid_argument("unknown dgp: " + sim_dgp);
    }
    const PanelDataset data = simulate(spec, Rng(sim_seed, 0));
    save_panel_csv(data, sim_out_path);
    std::cout << "wrote " << data.n() << " observations to " << sim_out_path
              << "\n";
    return 0;
  }

  if (*mc_cmd) {
    std::ifstream in(mc_config_path);
    if (!in) throw std::runtime_error("cannot open " + mc_config_path);
    json cfg_json = json::parse(in);
    const McConfig config = mc_config_from_json(cfg_json);
    try {
      const McResult result = run_mc(config);
      const auto [csv_path, json_path] = write_mc_outputs(result, mc_out_dir);
      std::cout << mc_summary_json(result).dump(2) << "\n";
      std::cerr << "wrote " << csv_path << " and " << json_path << "\n";
    } catch (const McAbort& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
