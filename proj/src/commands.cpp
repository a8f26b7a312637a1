#include "bid/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bid/alpha_metrics.hpp"
#include "bid/backtest.hpp"
#include "bid/gibbs.hpp"
#include "bid/id_core.hpp"
#include "bid/importance.hpp"
#include "bid/io.hpp"
#include "bid/randomized_id.hpp"

namespace bid {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

enum class CliMode { kGbt, kIid, kRandomized, kRankIc };

CliMode parse_mode(const std::string& mode, bool allow_rankic) {
  if (mode == "gbt") return CliMode::kGbt;
  if (mode == "iid") return CliMode::kIid;
  if (mode == "randomized") return CliMode::kRandomized;
  if (mode == "rankic" && allow_rankic) return CliMode::kRankIc;
  throw std::runtime_error("unknown mode '" + mode + "', expected gbt, iid, randomized" +
                           (allow_rankic ? " or rankic" : ""));
}

std::string display_name(CliMode mode) {
  switch (mode) {
    case CliMode::kGbt: return "BID with GBT";
    case CliMode::kIid: return "BID with IID";
    case CliMode::kRandomized: return "Randomized ID";
    case CliMode::kRankIc: return "Highest RankIC";
  }
  return {};
}

SelectionMethod selection_method(CliMode mode) {
  switch (mode) {
    case CliMode::kGbt: return SelectionMethod::kGbt;
    case CliMode::kIid: return SelectionMethod::kIid;
    case CliMode::kRandomized: return SelectionMethod::kRandomized;
    case CliMode::kRankIc: return SelectionMethod::kTopRankIc;
  }
  return SelectionMethod::kGbt;
}

ReturnConvention parse_convention(const std::string& name) {
  if (name == "current") return ReturnConvention::kCurrentClose;
  if (name == "previous") return ReturnConvention::kPreviousClose;
  throw std::runtime_error("unknown return convention '" + name +
                           "', expected current or previous");
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json j;
  j["mode"] = cfg.mode;
  j["k"] = cfg.k;
  j["iterations"] = cfg.iterations;
  j["burn_in"] = cfg.burn_in;
  j["thinning"] = cfg.thinning;
  j["seed"] = cfg.seed;
  j["swaps_per_sweep"] = cfg.swaps_per_sweep;
  j["select_m"] = cfg.select_m;
  j["h"] = cfg.h;
  j["d_in"] = cfg.d_in;
  j["importance_scale"] = cfg.importance_scale;
  j["importance_source"] = cfg.importance_source;
  j["return_convention"] = cfg.return_convention;
  j["transpose"] = cfg.transpose;
  j["alphas_path"] = cfg.alphas_path;
  j["prices_path"] = cfg.prices_path;
  j["manifest_path"] = cfg.manifest_path;
  j["out_dir"] = cfg.out_dir;
  return j;
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
  const fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
  fs::create_directories(dir);
  return dir / name;
}

void write_json_file(const RunConfig& cfg, const std::string& name, ordered_json body) {
  ordered_json j;
  j["config"] = config_json(cfg);
  for (auto& [key, value] : body.items()) j[key] = std::move(value);
  write_text_file(out_path(cfg, name).string(), j.dump(2) + "\n");
}

void write_csv_file(const RunConfig& cfg, const std::string& name, const std::string& body) {
  write_text_file(out_path(cfg, name).string(),
                  "# config: " + config_json(cfg).dump() + "\n" + body);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

ChainConfig chain_config(const RunConfig& cfg, CliMode mode) {
  ChainConfig c;
  c.k = cfg.k;
  c.iterations = cfg.iterations;
  c.burn_in = cfg.burn_in;
  c.thinning = cfg.thinning;
  c.seed = cfg.seed;
  c.swaps_per_sweep = cfg.swaps_per_sweep;
  c.mode = mode == CliMode::kIid ? Mode::kIid : Mode::kGbt;
  return c;
}

std::vector<double> returns_for(const RunConfig& cfg, std::size_t days) {
  if (cfg.prices_path.empty()) throw std::runtime_error("a price series is required, pass --prices");
  const PriceSeries prices = load_prices(cfg.prices_path);
  const ReturnSeries ret = returns(prices, parse_convention(cfg.return_convention));
  if (ret.values.size() != days) {
    throw std::runtime_error(cfg.prices_path + ": price series yields " +
                             std::to_string(ret.values.size()) + " returns, data spans " +
                             std::to_string(days) + " days");
  }
  return ret.values;
}

// Importance for the candidate columns of the matrix being decomposed. Rank
// correlation treats the rows as consecutive days, so it needs a price series
// covering them.
ImportanceVector chain_importance(const Matrix& a, const RunConfig& cfg) {
  const auto n = static_cast<std::size_t>(a.cols());
  if (cfg.importance_source == "uniform") return uniform_importance(n);
  RawImportance raw;
  if (cfg.importance_source == "rankic") {
    const std::vector<double> ret = returns_for(cfg, static_cast<std::size_t>(a.rows()));
    raw = rankic_importance(a.transpose(), ret, cfg.h);
  } else {
    raw = load_importance(cfg.importance_source, n);
  }
  return squash(raw, cfg.importance_scale);
}

std::vector<std::string> labels_for(const std::vector<std::string>& all,
                                    const std::vector<std::size_t>& indices) {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (std::size_t idx : indices) out.push_back(all[idx]);
  return out;
}

std::string portfolio_csv(const PortfolioSeries& p) {
  std::string body = "day,daily_return,value\n";
  for (std::size_t t = 0; t < p.daily_returns.size(); ++t) {
    body += std::to_string(t + 1) + "," + format_double(p.daily_returns[t]) + "," +
            format_double(p.values[t + 1]) + "\n";
  }
  return body;
}

ordered_json metrics_json(const PerfMetrics& m) {
  ordered_json j;
  j["sharpe"] = m.sharpe;
  j["annual_return"] = m.annual_return;
  j["max_drawdown"] = m.max_drawdown;
  j["degenerate"] = m.degenerate;
  return j;
}

struct LoadedAssets {
  std::vector<AssetData> assets;
};

LoadedAssets load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (!manifest.contains("assets") || !manifest["assets"].is_array() ||
      manifest["assets"].empty()) {
    throw std::runtime_error(path + ": expected a nonempty \"assets\" array");
  }
  const fs::path base = fs::path(path).parent_path();
  LoadedAssets loaded;
  for (const auto& entry : manifest["assets"]) {
    for (const char* key : {"name", "alphas", "prices"}) {
      if (!entry.contains(key) || !entry[key].is_string()) {
        throw std::runtime_error(path + ": each asset needs string fields name, alphas, prices");
      }
    }
    AssetData asset;
    asset.name = entry["name"].get<std::string>();
    const auto resolve = [&](const std::string& p) {
      const fs::path fp(p);
      return fp.is_absolute() ? fp.string() : (base / fp).string();
    };
    asset.alphas = load_alpha_matrix(resolve(entry["alphas"].get<std::string>())).values;
    asset.prices = load_prices(resolve(entry["prices"].get<std::string>()));
    loaded.assets.push_back(std::move(asset));
  }
  return loaded;
}

BacktestOptions backtest_options(const RunConfig& cfg, CliMode mode, std::size_t n_alphas) {
  BacktestOptions options;
  options.select_m = cfg.select_m;
  options.h = cfg.h;
  options.method = selection_method(mode);
  options.chain = chain_config(cfg, mode);
  options.importance_scale = cfg.importance_scale;
  options.convention = parse_convention(cfg.return_convention);
  if (mode == CliMode::kIid && cfg.importance_source != "rankic") {
    if (cfg.importance_source == "uniform") {
      options.importance_override.assign(n_alphas, 0.0);
    } else {
      options.importance_override = load_importance(cfg.importance_source, n_alphas).values;
    }
  }
  return options;
}

}  // namespace

int run_decompose(const RunConfig& cfg) {
  const CliMode mode = parse_mode(cfg.mode, false);
  if (cfg.alphas_path.empty()) throw std::runtime_error("decompose needs --alphas");
  const DataMatrix loaded = load_alpha_matrix(cfg.alphas_path);
  DataMatrix data;
  if (cfg.transpose) {
    data.values = loaded.values.transpose();
    data.row_labels = loaded.col_labels;
    data.col_labels = loaded.row_labels;
  } else {
    data = loaded;
  }
  const Matrix& a = data.values;

  if (mode == CliMode::kRandomized) {
    const RidResult rid = randomized_id(a, cfg.k, cfg.seed);
    ordered_json body;
    body["method"] = display_name(mode);
    body["basis_indices"] = rid.basis_indices;
    body["basis_labels"] = labels_for(data.col_labels, rid.basis_indices);
    body["mse"] = rid.reconstruction_mse;
    body["rank_deficient"] = rid.rank_warning;
    write_json_file(cfg, "decomposition.json", std::move(body));
    DataMatrix w{rid.w, labels_for(data.col_labels, rid.basis_indices), data.col_labels};
    write_csv_file(cfg, "w_matrix.csv", data_matrix_csv(w, "w"));
    std::printf("%s MSE %s\n", display_name(mode).c_str(), fixed(rid.reconstruction_mse, 3).c_str());
    return 0;
  }

  const ChainConfig chain = chain_config(cfg, mode);
  const Hyperparams h = Hyperparams::weak_defaults(a.cols());
  ImportanceVector importance;
  const ImportanceVector* importance_ptr = nullptr;
  if (mode == CliMode::kIid) {
    importance = chain_importance(a, cfg);
    importance_ptr = &importance;
  }
  ChainState state;
  const Trace tr = run_chain(a, h, chain, importance_ptr, &state);
  const Decomposition dec = postprocess(a, state.r);

  ordered_json trace;
  trace["losses"] = tr.losses;
  trace["sigma2"] = tr.retained_sigma2;
  trace["selection_scores"] = tr.selection_scores;
  trace["retained_r"] = tr.retained_r;
  trace["min_loss_post_burn_in"] = tr.min_loss_post_burn_in;
  trace["mean_loss_post_burn_in"] = tr.mean_loss_post_burn_in;
  trace["retained_count"] = tr.retained_count;
  trace["iterations_run"] = tr.iterations_run;
  write_json_file(cfg, "trace.json", std::move(trace));

  std::string loss_body = "iteration,loss\n";
  for (std::size_t t = 0; t < tr.losses.size(); ++t) {
    loss_body += std::to_string(t) + "," + format_double(tr.losses[t]) + "\n";
  }
  write_csv_file(cfg, "loss_curve.csv", loss_body);

  std::vector<std::vector<double>> per_entry(tr.monitored_entries.size());
  for (std::size_t e = 0; e < per_entry.size(); ++e) {
    per_entry[e].reserve(tr.monitored_y.size());
    for (const auto& snapshot : tr.monitored_y) per_entry[e].push_back(snapshot[e]);
  }
  const std::size_t max_lag = tr.retained_count == 0
                                  ? 0
                                  : std::min<std::size_t>(50, tr.retained_count - 1);
  const std::vector<double> acf = averaged_autocorrelation(per_entry, max_lag);
  std::string acf_body = "lag,autocorrelation\n";
  for (std::size_t lag = 0; lag < acf.size(); ++lag) {
    acf_body += std::to_string(lag) + "," + format_double(acf[lag]) + "\n";
  }
  write_csv_file(cfg, "autocorrelation.csv", acf_body);

  ordered_json body;
  body["method"] = display_name(mode);
  body["basis_indices"] = dec.basis_indices;
  body["basis_labels"] = labels_for(data.col_labels, dec.basis_indices);
  body["pre_mse"] = tr.losses.back();
  body["mse"] = dec.mse;
  body["rank_deficient"] = dec.rank_deficient;
  body["magnitude_violations"] = dec.magnitude_violations;
  write_json_file(cfg, "decomposition.json", std::move(body));
  DataMatrix w{dec.w, labels_for(data.col_labels, dec.basis_indices), data.col_labels};
  write_csv_file(cfg, "w_matrix.csv", data_matrix_csv(w, "w"));

  const char* label = mode == CliMode::kIid ? "IID" : "GBT";
  std::printf("%s Min %s\n", label, fixed(tr.min_loss_post_burn_in, 3).c_str());
  std::printf("%s Mean %s\n", label, fixed(tr.mean_loss_post_burn_in, 3).c_str());
  return 0;
}

int run_select(const RunConfig& cfg) {
  const CliMode mode = parse_mode(cfg.mode, true);
  if (cfg.alphas_path.empty()) throw std::runtime_error("select needs --alphas");
  const DataMatrix data = load_alpha_matrix(cfg.alphas_path);
  const std::vector<double> ret = returns_for(cfg, static_cast<std::size_t>(data.cols()));

  BacktestOptions options = backtest_options(cfg, mode, static_cast<std::size_t>(data.rows()));
  const std::vector<double> scores = selection_scores(data.values, ret, options, cfg.seed);
  const std::vector<std::size_t> selected = top_m_select(scores, cfg.select_m);

  double ic_sum = 0.0;
  Matrix rows(selected.size(), data.cols());
  for (std::size_t t = 0; t < selected.size(); ++t) {
    const auto row = static_cast<Eigen::Index>(selected[t]);
    std::vector<double> signal(data.values.row(row).begin(), data.values.row(row).end());
    ic_sum += rank_ic(signal, ret, cfg.h);
    rows.row(static_cast<Eigen::Index>(t)) = data.values.row(row);
  }
  const double mean_ic = ic_sum / static_cast<double>(selected.size());
  const CorrelationSummary corr = mean_pairwise_correlation(rows);

  ordered_json body;
  body["method"] = display_name(mode);
  body["scores"] = scores;
  body["selected_indices"] = selected;
  body["selected_labels"] = labels_for(data.row_labels, selected);
  body["mean_rank_ic"] = mean_ic;
  body["mean_correlation"] = corr.mean_abs;
  body["degenerate_pairs"] = corr.degenerate_pairs;
  write_json_file(cfg, "selection.json", std::move(body));

  std::printf("Methods %s\n", display_name(mode).c_str());
  std::printf("Mean RankIC %s\n", fixed(mean_ic, 4).c_str());
  std::printf("Mean Correlation %s\n", fixed(corr.mean_abs, 4).c_str());
  return 0;
}

int run_backtest_command(const RunConfig& cfg) {
  const CliMode mode = parse_mode(cfg.mode, true);
  if (cfg.manifest_path.empty()) throw std::runtime_error("backtest needs --manifest");
  LoadedAssets loaded = load_manifest(cfg.manifest_path);

  BacktestOptions options =
      backtest_options(cfg, mode, static_cast<std::size_t>(loaded.assets.front().alphas.rows()));
  options.split.d = static_cast<std::size_t>(loaded.assets.front().alphas.cols());
  options.split.d_in = cfg.d_in;
  const BacktestReport report = run_backtest(loaded.assets, options);

  double ic_sum = 0.0;
  double corr_sum = 0.0;
  ordered_json assets = ordered_json::array();
  for (const AssetResult& asset : report.assets) {
    ic_sum += asset.mean_rank_ic;
    corr_sum += asset.correlation.mean_abs;
    ordered_json a;
    a["name"] = asset.name;
    a["selected_indices"] = asset.selected;
    a["mean_rank_ic"] = asset.mean_rank_ic;
    a["mean_correlation"] = asset.correlation.mean_abs;
    a["degenerate_pairs"] = asset.correlation.degenerate_pairs;
    ordered_json fits = ordered_json::array();
    for (const OlsFit& f : asset.fits) {
      ordered_json fit;
      fit["alpha_index"] = f.alpha_index;
      fit["w"] = f.w;
      fit["b"] = f.b;
      fit["degenerate"] = f.degenerate;
      fits.push_back(std::move(fit));
    }
    a["fits"] = std::move(fits);
    a["long_days_is"] = std::count(asset.signals_is.begin(), asset.signals_is.end(), 1);
    a["long_days_os"] = std::count(asset.signals_os.begin(), asset.signals_os.end(), 1);
    assets.push_back(std::move(a));
  }
  const auto n_assets = static_cast<double>(report.assets.size());
  const double mean_ic = ic_sum / n_assets;
  const double mean_corr = corr_sum / n_assets;

  ordered_json body;
  body["method"] = display_name(mode);
  body["assets"] = std::move(assets);
  body["mean_rank_ic"] = mean_ic;
  body["mean_correlation"] = mean_corr;
  body["in_sample"] = metrics_json(report.in_sample_metrics);
  body["out_of_sample"] = metrics_json(report.out_of_sample_metrics);
  write_json_file(cfg, "backtest_report.json", std::move(body));
  write_csv_file(cfg, "portfolio_is.csv", portfolio_csv(report.in_sample));
  write_csv_file(cfg, "portfolio_os.csv", portfolio_csv(report.out_of_sample));

  std::printf("Methods %s\n", display_name(mode).c_str());
  std::printf("Mean RankIC %s\n", fixed(mean_ic, 4).c_str());
  std::printf("Mean Correlation %s\n", fixed(mean_corr, 4).c_str());
  std::printf("Sharpe Ratio (OS) %s\n", fixed(report.out_of_sample_metrics.sharpe, 4).c_str());
  std::printf("Sharpe Ratio (IS) %s\n", fixed(report.in_sample_metrics.sharpe, 4).c_str());
  std::printf("Annual Return (OS) %s\n",
              fixed(report.out_of_sample_metrics.annual_return, 4).c_str());
  std::printf("Annual Return (IS) %s\n", fixed(report.in_sample_metrics.annual_return, 4).c_str());
  std::printf("Max Drawdown (OS) %s\n",
              fixed(report.out_of_sample_metrics.max_drawdown, 4).c_str());
  std::printf("Max Drawdown (IS) %s\n", fixed(report.in_sample_metrics.max_drawdown, 4).c_str());
  return 0;
}

}  // namespace bid
