#include "copulalab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "copulalab/chain.hpp"
#include "copulalab/errors.hpp"
#include "copulalab/grid.hpp"
#include "copulalab/mixing.hpp"
#include "copulalab/spec_json.hpp"
#include "copulalab/theorems.hpp"
#include "json.hpp"

namespace copulalab::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct LoadedSpec {
  CopulaSpec spec;
  std::string digest;
};

// --spec accepts a file path or an inline JSON object.
LoadedSpec load_spec_arg(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') {
    return {parse_spec(arg, fs::current_path()), spec_digest(arg)};
  }
  std::ifstream in(arg);
  if (!in) throw ValidationError(fmt::format("cannot read spec file '{}'", arg));
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return {parse_spec(text, fs::path(arg).parent_path()), spec_digest(text)};
}

std::string fmt17(double v) { return fmt::format("{:.17g}", v); }

// Writes to --out when given, else to the report stream.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}

  void write(const std::string& content) {
    if (path_.empty()) {
      fallback_ << content;
      return;
    }
    std::ofstream file(path_, std::ios::binary);
    if (!file) throw ValidationError(fmt::format("cannot write '{}'", path_));
    file << content;
  }

  void manifest(const std::string& subcommand, const std::optional<std::string>& digest,
                const std::map<std::string, std::string>& parameters) const {
    if (path_.empty()) return;
    json m;
    m["subcommand"] = subcommand;
    m["spec_digest"] = digest ? json(*digest) : json(nullptr);
    m["parameters"] = parameters;
    m["tool_version"] = kToolVersion;
    m["outputs"] = json::array({path_});
    std::ofstream file(path_ + ".manifest.json", std::ios::binary);
    if (!file) throw ValidationError(fmt::format("cannot write manifest for '{}'", path_));
    file << m.dump(2) << '\n';
  }

 private:
  std::string path_;
  std::ostream& fallback_;
};

json to_json(const BoundCheckResult& r) {
  return json{{"theorem", std::string(to_string(r.theorem))},
              {"m", r.m},
              {"bound", r.bound},
              {"measured", r.measured},
              {"satisfied", r.satisfied},
              {"applicable", r.applicable},
              {"witness", r.witness}};
}

std::pair<std::vector<double>, std::vector<CopulaSpec>> mixture_parts(const CopulaSpec& spec,
                                                                      bool allow_single) {
  if (const auto* mix = spec.get_if<family::Mixture>()) return {mix->weights, mix->components};
  if (!allow_single) {
    throw ValidationError(
        fmt::format("mixture theorems need a spec of type 'mixture', got '{}'", spec.type_name()));
  }
  return {{1.0}, {spec}};
}

void error_line(std::ostream& err, std::string_view kind, std::string_view message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

std::vector<int> parse_lags(const std::string& text) {
  std::vector<int> lags;
  std::stringstream stream(text);
  std::string item;
  auto to_int = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("bad lag specification '{}'", text));
    }
  };
  while (std::getline(stream, item, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      lags.push_back(to_int(item));
      continue;
    }
    const int from = to_int(item.substr(0, dots));
    const int to = to_int(item.substr(dots + 2));
    if (to < from) throw ValidationError(fmt::format("empty lag range '{}'", item));
    for (int l = from; l <= to; ++l) lags.push_back(l);
  }
  if (lags.empty()) throw ValidationError("no lags given");
  for (std::size_t k = 0; k < lags.size(); ++k) {
    if (lags[k] < 1) throw ValidationError(fmt::format("lag {} is not >= 1", lags[k]));
    if (k > 0 && lags[k] <= lags[k - 1]) {
      throw ValidationError(fmt::format("lags '{}' are not strictly ascending", text));
    }
  }
  return lags;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      std::size_t pos = 0;
      values.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("bad number '{}' in list '{}'", item, text));
    }
  }
  if (values.empty()) throw ValidationError("empty number list");
  return values;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Copula-based Markov chains: grids, mixing coefficients and bound checks",
               "copula_lab"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  int code = kOk;
  std::function<void()> action;

  std::string spec_arg, out_path;
  int n = kDefaultResolution;

  auto* discretize_cmd = app.add_subcommand("discretize", "Write the grid copula of a spec as CSV");
  discretize_cmd->add_option("--spec", spec_arg, "Spec JSON file or inline JSON")->required();
  discretize_cmd->add_option("--n", n, "Grid resolution")->check(CLI::Range(2, 1024));
  discretize_cmd->add_option("--out", out_path, "Output CSV");
  discretize_cmd->callback([&] {
    action = [&] {
      const auto loaded = load_spec_arg(spec_arg);
      std::ostringstream csv;
      write_grid_csv(csv, discretize(loaded.spec, n));
      Output output(out_path, out);
      output.write(csv.str());
      output.manifest("discretize", loaded.digest, {{"n", std::to_string(n)}});
    };
  });

  std::string lags_arg = "1";
  auto* coeffs_cmd = app.add_subcommand("coeffs", "Mixing coefficients per lag as CSV");
  coeffs_cmd->add_option("--spec", spec_arg, "Spec JSON file or inline JSON")->required();
  coeffs_cmd->add_option("--n", n, "Grid resolution")->check(CLI::Range(2, 1024));
  coeffs_cmd->add_option("--lags", lags_arg, "Lags, e.g. 1..5 or 1,2,4");
  coeffs_cmd->add_option("--out", out_path, "Output CSV");
  coeffs_cmd->callback([&] {
    action = [&] {
      const auto loaded = load_spec_arg(spec_arg);
      const auto lags = parse_lags(lags_arg);
      const MixingReport rep = report(loaded.spec, n, lags);
      std::string csv = "lag,rho,phi,beta,psi_prime,psi,n\n";
      for (const auto& row : rep.rows) {
        const auto& v = row.values;
        csv += fmt::format("{},{},{},{},{},{},{}\n", row.lag, fmt17(v.rho), fmt17(v.phi),
                           fmt17(v.beta), fmt17(v.psi_prime), fmt17(v.psi), rep.resolution);
      }
      Output output(out_path, out);
      output.write(csv);
      output.manifest("coeffs", loaded.digest, {{"n", std::to_string(n)}, {"lags", lags_arg}});
    };
  });

  std::string theorem_arg, eps_arg = "0.1,0.05,0.01", verify_lags_arg;
  int m = 1;
  int max_lag = 0;
  std::vector<int> ergodic;
  auto* verify_cmd = app.add_subcommand("verify", "Check a theorem bound; JSON report array");
  verify_cmd->add_option("--theorem", theorem_arg, "Theorem id")->required();
  verify_cmd->add_option("--spec", spec_arg, "Spec JSON file or inline JSON")->required();
  verify_cmd->add_option("--m", m, "Lag m")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--n", n, "Grid resolution")->check(CLI::Range(2, 1024));
  verify_cmd->add_option("--max-lag", max_lag, "Largest lag for exponential-rate (default 5m)");
  verify_cmd->add_option("--eps-list", eps_arg, "Comma-separated epsilons for psi-divergence");
  verify_cmd->add_option("--lags", verify_lags_arg, "Lags for psi-divergence (default m)");
  verify_cmd->add_option("--ergodic-component", ergodic,
                         "1-based index of a component asserted ergodic and aperiodic");
  verify_cmd->add_option("--out", out_path, "Output JSON");
  verify_cmd->callback([&] {
    action = [&] {
      const TheoremId theorem = parse_theorem_id(theorem_arg);
      const auto loaded = load_spec_arg(spec_arg);
      std::vector<BoundCheckResult> results;
      std::map<std::string, std::string> parameters{
          {"theorem", theorem_arg}, {"m", std::to_string(m)}, {"n", std::to_string(n)}};
      switch (theorem) {
        case TheoremId::DensityPsiPrime:
          results.push_back(verify_density_bound(loaded.spec, m, n));
          break;
        case TheoremId::TupleDecomposition: {
          const auto [w, c] = mixture_parts(loaded.spec, true);
          results.push_back(tuple_decomposition_check(w, c, m, n));
          break;
        }
        case TheoremId::MixtureRho:
        case TheoremId::MixturePsiPrime:
        case TheoremId::MixturePhi:
        case TheoremId::MixtureBeta: {
          const auto [w, c] = mixture_parts(loaded.spec, false);
          const Coefficient coef = theorem == TheoremId::MixtureRho        ? Coefficient::Rho
                                   : theorem == TheoremId::MixturePsiPrime ? Coefficient::PsiPrime
                                   : theorem == TheoremId::MixturePhi      ? Coefficient::Phi
                                                                           : Coefficient::Beta;
          MixtureBoundOptions options;
          for (int i : ergodic) options.ergodic_components.push_back(i - 1);
          results.push_back(verify_mixture_bound(w, c, coef, m, n, options));
          break;
        }
        case TheoremId::PsiDivergence: {
          const auto f = as_frechet(loaded.spec);
          if (!f) {
            throw ValidationError("psi-divergence needs a Frechet-family spec (frechet, mardia, "
                                  "independence, w, m or mixtures of these)");
          }
          const auto lags = verify_lags_arg.empty() ? std::vector<int>{m} : parse_lags(verify_lags_arg);
          const auto eps = parse_number_list(eps_arg);
          results = divergence_results(psi_divergence_table(f->a, f->b, lags, eps));
          parameters["eps_list"] = eps_arg;
          break;
        }
        case TheoremId::ExponentialRate: {
          const int limit = max_lag > 0 ? max_lag : 5 * m;
          results.push_back(rate_result(exponential_rate_table(loaded.spec, m, n, limit), m));
          parameters["max_lag"] = std::to_string(limit);
          break;
        }
      }
      json array = json::array();
      for (const auto& r : results) {
        array.push_back(to_json(r));
        if (r.applicable && !r.satisfied) code = kUnsatisfied;
      }
      Output output(out_path, out);
      output.write(array.dump(2) + "\n");
      output.manifest("verify", loaded.digest, parameters);
    };
  });

  std::size_t steps = 0;
  std::uint64_t seed = 0;
  std::string marginal_arg = "uniform";
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a stationary chain");
  simulate_cmd->add_option("--spec", spec_arg, "Spec JSON file or inline JSON")->required();
  simulate_cmd->add_option("--steps", steps, "Chain length")->required();
  simulate_cmd->add_option("--seed", seed, "RNG seed")->required();
  simulate_cmd->add_option("--marginal", marginal_arg, "uniform | exp:<rate> | normal:<mu>,<sigma>");
  simulate_cmd->add_option("--out", out_path, "Output CSV (one value per line)");
  simulate_cmd->callback([&] {
    action = [&] {
      const auto loaded = load_spec_arg(spec_arg);
      const Marginal marginal = Marginal::parse(marginal_arg);
      const ChainSample sample = sample_chain(loaded.spec, steps, seed, marginal);
      std::string csv;
      csv.reserve(sample.values.size() * 24);
      for (double v : sample.values) {
        csv += fmt17(v);
        csv += '\n';
      }
      Output output(out_path, out);
      output.write(csv);
      output.manifest("simulate", loaded.digest,
                      {{"steps", std::to_string(steps)},
                       {"seed", std::to_string(seed)},
                       {"marginal", marginal.to_string()}});
    };
  });

  std::string in_path;
  int lag = 1;
  int grid_n = 8;
  auto* lagstats_cmd = app.add_subcommand("lagstats", "Empirical lag statistics of a chain CSV");
  lagstats_cmd->add_option("--in", in_path, "Chain CSV (one value per line)")->required();
  lagstats_cmd->add_option("--lag", lag, "Lag")->check(CLI::PositiveNumber);
  lagstats_cmd->add_option("--grid-n", grid_n, "Histogram resolution")->check(CLI::PositiveNumber);
  lagstats_cmd->add_option("--out", out_path, "Output JSON");
  lagstats_cmd->callback([&] {
    action = [&] {
      std::ifstream in(in_path);
      if (!in) throw ValidationError(fmt::format("cannot read chain file '{}'", in_path));
      std::vector<double> values;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        try {
          values.push_back(std::stod(line));
        } catch (const std::exception&) {
          throw ValidationError(fmt::format("bad value '{}' in '{}'", line, in_path));
        }
      }
      const EmpiricalLagStats stats = empirical_lag_stats(values, lag, grid_n);
      json counts = json::array();
      for (int i = 0; i < grid_n; ++i) {
        json row = json::array();
        for (int j = 0; j < grid_n; ++j) row.push_back(static_cast<long long>(stats.counts(i, j)));
        counts.push_back(std::move(row));
      }
      json report{{"lag", stats.lag},
                  {"pairs", stats.pairs},
                  {"grid_n", grid_n},
                  {"freq_equal", stats.freq_equal},
                  {"freq_reflected",
                   stats.freq_reflected ? json(*stats.freq_reflected) : json(nullptr)},
                  {"counts", std::move(counts)}};
      Output output(out_path, out);
      output.write(report.dump(2) + "\n");
      output.manifest("lagstats", std::nullopt,
                      {{"in", in_path}, {"lag", std::to_string(lag)}, {"grid_n", std::to_string(grid_n)}});
    };
  });

  double a = 0.0, b = 0.0;
  auto* divergence_cmd = app.add_subcommand("psi-divergence", "Lower bounds on psi for Frechet chains");
  divergence_cmd->add_option("--a", a, "Weight of W")->required();
  divergence_cmd->add_option("--b", b, "Weight of M")->required();
  divergence_cmd->add_option("--lags", lags_arg, "Lags");
  divergence_cmd->add_option("--eps-list", eps_arg, "Comma-separated epsilons in (0,1)");
  divergence_cmd->add_option("--out", out_path, "Output JSON");
  divergence_cmd->callback([&] {
    action = [&] {
      const auto lags = parse_lags(lags_arg);
      const auto eps = parse_number_list(eps_arg);
      const DivergenceTable table = psi_divergence_table(a, b, lags, eps);
      json rows = json::array();
      for (const auto& r : table.rows) {
        rows.push_back(json{{"lag", r.lag},
                            {"epsilon", r.epsilon},
                            {"lower_bound", r.lower_bound},
                            {"witness", r.witness},
                            {"grid_n", r.grid_n},
                            {"grid_psi", r.grid_psi},
                            {"grid_band_ratio", r.grid_band_ratio}});
      }
      json report{{"a", a}, {"b", b}, {"applicable", table.applicable},
                  {"diverges", table.diverges}, {"rows", std::move(rows)}};
      const std::string spec_text = json{{"type", "frechet"}, {"a", a}, {"b", b}}.dump();
      Output output(out_path, out);
      output.write(report.dump(2) + "\n");
      output.manifest("psi-divergence", spec_digest(spec_text),
                      {{"lags", lags_arg}, {"eps_list", eps_arg}});
      for (const auto& r : divergence_results(table)) {
        if (r.applicable && !r.satisfied) code = kUnsatisfied;
      }
    };
  });

  std::vector<const char*> argv{"copula_lab"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    error_line(err, "usage", e.what());
    return kUsageError;
  }

  try {
    if (action) action();
  } catch (const NumericalError& e) {
    error_line(err, "numerical", e.what());
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    error_line(err, "validation", e.what());
    return kUsageError;
  } catch (const UnsupportedError& e) {
    error_line(err, "unsupported", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    error_line(err, "internal", e.what());
    return kNumericalError;
  }
  return code;
}

}  // namespace copulalab::cli
