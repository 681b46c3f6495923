#include "cglasso/study.hpp"

#include "cglasso/dataset_io.hpp"
#include "cglasso/parallel.hpp"
#include "cglasso/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cglasso {

using json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kKnownMethods{"cglasso", "cglasso-exact", "lod-glasso", "mar-em"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw UsageError("config: '" + key + "' expects an integer, got '" + value + "'");
  }
}

double parse_number(const std::string& key, const std::string& value) {
  try {
    return parse_double(value);
  } catch (const DataError&) {
    throw UsageError("config: '" + key + "' expects a number, got '" + value + "'");
  }
}

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

}  // namespace

StudyConfig StudyConfig::defaults(const std::string& study) {
  StudyConfig c;
  c.study = study;
  if (study == "model1") {
    // the struct defaults
  } else if (study == "model2") {
    c.vary = "k";
    c.settings = {1.0, 5.0};
    c.H = 30;
  } else if (study == "model3") {
    c.p = 200;
    c.settings = {100.0};
  } else if (study == "approx_vs_exact") {
    c.p = 10;
    c.k = 1.0;
    c.vary = "D";
    c.settings = {2.0, 5.0};
    c.censor_prob = 0.25;
    c.replicates = 10;
    c.gibbs_sweeps = 5000;
    c.burn_in = 200;
    c.methods = {"cglasso", "cglasso-exact"};
  } else if (study == "censor_robustness") {
    c.p = 39;
    c.n = 118;
    c.vary = "q";
    c.settings = {0.1, 0.2, 0.3};
  } else {
    throw UsageError("unknown study '" + study +
                     "' (expected model1, model2, model3, approx_vs_exact or censor_robustness)");
  }
  return c;
}

void StudyConfig::apply(const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "study") {
      if (value != study) throw UsageError("config: study id must be set before other keys");
    } else if (key == "replicates") replicates = static_cast<int>(parse_long(key, value));
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_long(key, value));
    else if (key == "threads") threads = static_cast<int>(parse_long(key, value));
    else if (key == "p") p = parse_long(key, value);
    else if (key == "n") n = parse_long(key, value);
    else if (key == "k") k = parse_number(key, value);
    else if (key == "vary") vary = value;
    else if (key == "settings") {
      settings.clear();
      for (const auto& s : split_list(value)) settings.push_back(parse_number(key, s));
    } else if (key == "H") H = parse_long(key, value);
    else if (key == "u") u = parse_number(key, value);
    else if (key == "censor_prob") censor_prob = parse_number(key, value);
    else if (key == "K") K = static_cast<int>(parse_long(key, value));
    else if (key == "rho_min") rho_min = parse_number(key, value);
    else if (key == "spacing") spacing = parse_spacing(value);
    else if (key == "mode") mode = parse_estep_mode(value);
    else if (key == "gibbs_sweeps") gibbs_sweeps = parse_long(key, value);
    else if (key == "burn_in") burn_in = parse_long(key, value);
    else if (key == "gibbs_batches") gibbs_batches = static_cast<int>(parse_long(key, value));
    else if (key == "em_tol") em_tol = parse_number(key, value);
    else if (key == "em_max_iter") em_max_iter = static_cast<int>(parse_long(key, value));
    else if (key == "glasso_tol") glasso_tol = parse_number(key, value);
    else if (key == "methods") methods = split_list(value);
    else throw UsageError("config: unknown key '" + key + "'");
  }
}

void StudyConfig::validate() const {
  if (replicates < 1) throw UsageError("study: replicates must be at least 1");
  if (p < 2 || n < 2) throw UsageError("study: p and n must be at least 2");
  if (vary != "H" && vary != "k" && vary != "D" && vary != "q")
    throw UsageError("study: vary must be H, k, D or q");
  if (settings.empty()) throw UsageError("study: settings must not be empty");
  for (double s : settings) {
    if (vary == "q" && !(s > 0.0 && s < 1.0)) throw UsageError("study: q settings must lie in (0, 1)");
    if ((vary == "H" || vary == "D") && (s < 0 || s > static_cast<double>(p) || s != std::floor(s)))
      throw UsageError("study: H settings must be integers in [0, p]");
    if (vary == "k" && !(s > 0.0 && s < static_cast<double>(p)))
      throw UsageError("study: k settings must lie in (0, p)");
  }
  if (vary != "k" && !(k > 0.0 && k < static_cast<double>(p))) throw UsageError("study: k must lie in (0, p)");
  if (vary == "k" && (H < 0 || H > p)) throw UsageError("study: H must lie in [0, p]");
  if (!(censor_prob > 0.0 && censor_prob < 1.0)) throw UsageError("study: censor_prob must lie in (0, 1)");
  if (K < 1) throw UsageError("study: K must be at least 1");
  if (!(rho_min >= 0.0)) throw UsageError("study: rho_min must be >= 0");
  if (mode == EStepMode::MissingAtRandom) throw UsageError("study: mode must be meanfield or exact");
  if (gibbs_sweeps < 2 || gibbs_batches < 2 || burn_in < 0)
    throw UsageError("study: invalid Gibbs settings");
  if (!(em_tol > 0.0) || em_max_iter < 1 || !(glasso_tol > 0.0))
    throw UsageError("study: invalid tolerances");
  if (methods.empty()) throw UsageError("study: no methods");
  for (const auto& m : methods)
    if (std::find(kKnownMethods.begin(), kKnownMethods.end(), m) == kKnownMethods.end())
      throw UsageError("study: unknown method '" + m + "'");
}

std::string StudyConfig::to_json() const {
  json j;
  j["study"] = study;
  j["replicates"] = replicates;
  j["seed"] = seed;
  j["p"] = p;
  j["n"] = n;
  j["k"] = k;
  j["vary"] = vary;
  j["settings"] = settings;
  j["H"] = H;
  j["u"] = u;
  j["censor_prob"] = censor_prob;
  j["K"] = K;
  j["rho_min"] = rho_min;
  j["spacing"] = to_string(spacing);
  j["mode"] = to_string(mode);
  j["gibbs_sweeps"] = gibbs_sweeps;
  j["burn_in"] = burn_in;
  j["gibbs_batches"] = gibbs_batches;
  j["em_tol"] = em_tol;
  j["em_max_iter"] = em_max_iter;
  j["glasso_tol"] = glasso_tol;
  j["methods"] = methods;
  return j.dump();
}

StudyConfig StudyConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  StudyConfig c = defaults(j.at("study").get<std::string>());
  c.replicates = j.at("replicates").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.p = j.at("p").get<Index>();
  c.n = j.at("n").get<Index>();
  c.k = j.at("k").get<double>();
  c.vary = j.at("vary").get<std::string>();
  c.settings = j.at("settings").get<std::vector<double>>();
  c.H = j.at("H").get<Index>();
  c.u = j.at("u").get<double>();
  c.censor_prob = j.at("censor_prob").get<double>();
  c.K = j.at("K").get<int>();
  c.rho_min = j.at("rho_min").get<double>();
  c.spacing = parse_spacing(j.at("spacing").get<std::string>());
  c.mode = parse_estep_mode(j.at("mode").get<std::string>());
  c.gibbs_sweeps = j.at("gibbs_sweeps").get<long>();
  c.burn_in = j.at("burn_in").get<long>();
  c.gibbs_batches = j.at("gibbs_batches").get<int>();
  c.em_tol = j.at("em_tol").get<double>();
  c.em_max_iter = j.at("em_max_iter").get<int>();
  c.glasso_tol = j.at("glasso_tol").get<double>();
  c.methods = j.at("methods").get<std::vector<std::string>>();
  return c;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

namespace {

struct SettingData {
  CensoredDataset data;
  Truth truth;
  Matrix latent;
};

SettingData make_data(const StudyConfig& c, double setting, std::uint64_t seed) {
  SimSpec spec;
  spec.p = c.p;
  spec.n = c.n;
  spec.u = c.u;
  spec.censor_prob = c.censor_prob;
  spec.seed = seed;
  const double k = c.vary == "k" ? setting : c.k;
  spec.edge_prob = k / static_cast<double>(c.p);

  if (c.study == "censor_robustness") {
    // Fully observed latent sample, then the top q fraction of all values is
    // censored at a single global threshold.
    spec.H = 0;
    spec.u = kInf;
    spec.background = Background::Uniform;
    spec.mu_lo = spec.mu_hi = 0.0;
    SimSample s = simulate(spec);
    std::vector<double> all(s.latent.data(), s.latent.data() + s.latent.size());
    std::sort(all.begin(), all.end());
    const auto n_cens = static_cast<std::size_t>(std::llround(setting * static_cast<double>(all.size())));
    const double threshold = all[all.size() - n_cens - 1];
    return {encode_censoring(s.latent, CensoringBounds::uniform(c.p, -kInf, threshold)), s.truth,
            s.latent};
  }
  spec.H = c.vary == "k" ? c.H : static_cast<Index>(setting);
  spec.background = c.study == "approx_vs_exact" ? Background::Calibrated : Background::Uniform;
  SimSample s = simulate(spec);
  return {std::move(s.data), std::move(s.truth), std::move(s.latent)};
}

PathOptions path_options(const StudyConfig& c, std::uint64_t seed) {
  PathOptions o;
  o.K = c.K;
  o.rho_min = c.rho_min;
  o.spacing = c.spacing;
  o.em.tol = c.em_tol;
  o.em.max_iter = c.em_max_iter;
  o.em.glasso.tol = c.glasso_tol;
  o.em.estep.mode = c.mode;
  o.em.estep.seed = derive_seed(seed, 0xe5);
  o.em.estep.threads = 1;
  o.em.estep.gibbs.sweeps = c.gibbs_sweeps;
  o.em.estep.gibbs.burn_in = c.burn_in;
  o.em.estep.gibbs.batches = c.gibbs_batches;
  return o;
}

double imputation_error(const SettingData& d, const Matrix& imputed) {
  if (imputed.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  double ss = 0.0;
  for (Index i = 0; i < d.data.n(); ++i)
    for (Index h = 0; h < d.data.p(); ++h)
      if (d.data.status(i, h) != Censor::Observed) {
        const double e = d.latent(i, h) - imputed(i, h);
        ss += e * e;
      }
  return std::sqrt(ss);
}

ReplicateOutcome run_replicate(const StudyConfig& c, std::size_t s, int r) {
  ReplicateOutcome out;
  out.setting = s;
  out.replicate = r;
  out.seed = derive_seed(c.seed, s, static_cast<std::uint64_t>(r));
  SettingData d;
  try {
    d = make_data(c, c.settings[s], out.seed);
  } catch (const Error& e) {
    out.error = e.what();
    return out;
  }

  std::vector<MethodPath> paths;
  for (const auto& name : c.methods) {
    MethodOutcome mo;
    mo.method = name;
    PathOptions o = path_options(c, out.seed);
    const double t0 = thread_cpu_seconds();
    try {
      MethodPath mp;
      if (name == "cglasso") {
        mp = cglasso_method(d.data, o);
      } else if (name == "cglasso-exact") {
        o.em.estep.mode = EStepMode::Exact;
        mp = cglasso_method(d.data, o);
      } else if (name == "lod-glasso") {
        mp = baseline_lod_glasso(d.data, o);
      } else {
        mp = baseline_mar_em(d.data, o);
      }
      mp.method = name;
      mo.ok = mp.complete;
      mo.error = mp.error;
      mo.metrics = metrics(d.truth, mp);
      mo.imputation_error = imputation_error(d, mp.imputed);
      mo.max_kkt = mp.max_kkt;
      mo.max_fixed_point = mp.max_fixed_point;
      mo.unconverged = mp.unconverged;
      paths.push_back(std::move(mp));
    } catch (const Error& e) {
      mo.ok = false;
      mo.error = e.what();
      paths.emplace_back();
    }
    mo.cpu_seconds = thread_cpu_seconds() - t0;
    out.methods.push_back(std::move(mo));
  }

  // Distance between the mean-field and exact paths, over their common rho points.
  const auto a = std::find(c.methods.begin(), c.methods.end(), "cglasso");
  const auto b = std::find(c.methods.begin(), c.methods.end(), "cglasso-exact");
  if (a != c.methods.end() && b != c.methods.end()) {
    const auto& pa = paths[static_cast<std::size_t>(a - c.methods.begin())];
    const auto& pb = paths[static_cast<std::size_t>(b - c.methods.begin())];
    const std::size_t K = std::min(pa.theta.size(), pb.theta.size());
    if (K > 0 && out.methods[static_cast<std::size_t>(a - c.methods.begin())].ok &&
        out.methods[static_cast<std::size_t>(b - c.methods.begin())].ok) {
      out.has_proximity = true;
      for (std::size_t k = 0; k < K; ++k) {
        out.max_dmu2 = std::max(out.max_dmu2, (pa.mu[k] - pb.mu[k]).squaredNorm());
        out.max_dtheta2 = std::max(out.max_dtheta2, (pa.theta[k] - pb.theta[k]).squaredNorm());
      }
    }
  }
  return out;
}

std::string fmt(double x) { return std::isnan(x) ? "NA" : format_double(x); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch == '\n' ? ' ' : ch;
  }
  return q + "\"";
}

double metric_value(const ReplicateOutcome& r, const MethodOutcome& m, const std::string& metric) {
  if (metric == "min_mse_mu") return m.metrics.min_mse_mu;
  if (metric == "min_mse_theta") return m.metrics.min_mse_theta;
  if (metric == "auc") return m.metrics.auc;
  if (metric == "imputation_error") return m.imputation_error;
  if (metric == "cpu_seconds") return m.cpu_seconds;
  if (metric == "max_kkt") return m.max_kkt;
  if (metric == "max_fixed_point") return m.max_fixed_point;
  if (metric == "max_dmu2") return r.has_proximity ? r.max_dmu2 : std::numeric_limits<double>::quiet_NaN();
  if (metric == "max_dtheta2")
    return r.has_proximity ? r.max_dtheta2 : std::numeric_limits<double>::quiet_NaN();
  throw UsageError("unknown metric '" + metric + "'");
}

Summary summarize_values(const std::vector<double>& v) {
  Summary s;
  s.count = static_cast<int>(v.size());
  if (v.empty()) {
    s.mean = s.sd = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return s;
}

json summary_json(const Summary& s) {
  json j;
  j["mean"] = std::isnan(s.mean) ? json(nullptr) : json(s.mean);
  j["sd"] = std::isnan(s.sd) ? json(nullptr) : json(s.sd);
  j["count"] = s.count;
  return j;
}

}  // namespace

StudyReport run_study(const StudyConfig& config) {
  config.validate();
  StudyReport report;
  report.config = config;
  const std::size_t S = config.settings.size();
  const auto R = static_cast<std::size_t>(config.replicates);
  report.replicates.resize(S * R);
  parallel_for(S * R, config.threads, [&](std::size_t t) {
    report.replicates[t] = run_replicate(config, t / R, static_cast<int>(t % R));
  });
  return report;
}

Summary summarize(const StudyReport& report, std::size_t setting, const std::string& method,
                  const std::string& metric) {
  std::vector<double> v;
  for (const auto& r : report.replicates) {
    if (r.setting != setting) continue;
    for (const auto& m : r.methods) {
      if (m.method != method || !m.ok) continue;
      const double x = metric_value(r, m, metric);
      if (!std::isnan(x)) v.push_back(x);
    }
  }
  return summarize_values(v);
}

std::string replicates_csv(const StudyReport& report) {
  std::ostringstream os;
  os << "# cglasso " << kVersion << " study report\n";
  os << "# config " << report.config.to_json() << "\n";
  os << "setting,replicate,seed,method,status,min_mse_mu,min_mse_theta,auc,imputation_error,"
        "max_dmu2,max_dtheta2,max_kkt,max_fixed_point,unconverged,error\n";
  const auto& c = report.config;
  for (const auto& r : report.replicates) {
    const std::string setting = c.vary + "=" + format_double(c.settings[r.setting]);
    if (!r.error.empty()) {
      os << setting << ',' << r.replicate << ',' << r.seed << ",,failed,NA,NA,NA,NA,NA,NA,NA,NA,0,"
         << csv_field(r.error) << '\n';
      continue;
    }
    for (const auto& m : r.methods) {
      os << setting << ',' << r.replicate << ',' << r.seed << ',' << m.method << ','
         << (m.ok ? "ok" : "failed") << ',' << fmt(m.metrics.min_mse_mu) << ','
         << fmt(m.metrics.min_mse_theta) << ',' << fmt(m.metrics.auc) << ','
         << fmt(m.imputation_error) << ',' << fmt(metric_value(r, m, "max_dmu2")) << ','
         << fmt(metric_value(r, m, "max_dtheta2")) << ',' << fmt(m.max_kkt) << ','
         << fmt(m.max_fixed_point) << ',' << m.unconverged << ',' << csv_field(m.error) << '\n';
    }
  }
  return os.str();
}

std::string timings_csv(const StudyReport& report) {
  std::ostringstream os;
  os << "setting,replicate,method,cpu_seconds\n";
  const auto& c = report.config;
  for (const auto& r : report.replicates)
    for (const auto& m : r.methods)
      os << c.vary << "=" << format_double(c.settings[r.setting]) << ',' << r.replicate << ','
         << m.method << ',' << format_double(m.cpu_seconds) << '\n';
  return os.str();
}

std::string aggregate_json(const StudyReport& report) {
  const auto& c = report.config;
  json j;
  j["version"] = kVersion;
  j["config"] = json::parse(c.to_json());
  json settings = json::array();
  for (std::size_t s = 0; s < c.settings.size(); ++s) {
    json js;
    js["vary"] = c.vary;
    js["value"] = c.settings[s];
    int gen_failed = 0;
    for (const auto& r : report.replicates)
      if (r.setting == s && !r.error.empty()) ++gen_failed;
    js["generation_failures"] = gen_failed;
    json methods = json::object();
    for (const auto& name : c.methods) {
      json jm;
      int ok = 0, failed = 0, unconverged = 0;
      double worst_kkt = 0.0, worst_fp = 0.0;
      std::vector<double> tpr_sum(static_cast<std::size_t>(c.K), 0.0);
      std::vector<double> fpr_sum(static_cast<std::size_t>(c.K), 0.0);
      int full = 0;
      for (const auto& r : report.replicates) {
        if (r.setting != s) continue;
        for (const auto& m : r.methods) {
          if (m.method != name) continue;
          if (!m.ok) {
            ++failed;
            continue;
          }
          ++ok;
          if (!std::isnan(m.max_kkt)) worst_kkt = std::max(worst_kkt, m.max_kkt);
          if (!std::isnan(m.max_fixed_point)) worst_fp = std::max(worst_fp, m.max_fixed_point);
          unconverged += m.unconverged;
          if (m.metrics.tpr.size() == static_cast<std::size_t>(c.K)) {
            ++full;
            for (std::size_t k = 0; k < tpr_sum.size(); ++k) {
              tpr_sum[k] += m.metrics.tpr[k];
              fpr_sum[k] += m.metrics.fpr[k];
            }
          }
        }
      }
      jm["replicates_ok"] = ok;
      jm["replicates_failed"] = failed;
      jm["max_kkt"] = worst_kkt;
      jm["max_fixed_point"] = worst_fp;
      jm["unconverged_fits"] = unconverged;
      for (const char* metric : {"min_mse_mu", "min_mse_theta", "auc", "imputation_error"})
        jm[metric] = summary_json(summarize(report, s, name, metric));
      for (auto& x : tpr_sum) x = full ? x / full : 0.0;
      for (auto& x : fpr_sum) x = full ? x / full : 0.0;
      jm["mean_tpr"] = tpr_sum;
      jm["mean_fpr"] = fpr_sum;
      methods[name] = jm;
    }
    js["methods"] = methods;
    if (std::find(c.methods.begin(), c.methods.end(), "cglasso-exact") != c.methods.end() &&
        std::find(c.methods.begin(), c.methods.end(), "cglasso") != c.methods.end()) {
      js["max_dmu2"] = summary_json(summarize(report, s, "cglasso", "max_dmu2"));
      js["max_dtheta2"] = summary_json(summarize(report, s, "cglasso", "max_dtheta2"));
    }
    settings.push_back(js);
  }
  j["settings"] = settings;
  return j.dump(2) + "\n";
}

void write_study_report(const StudyReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    if (!out) throw DataError("cannot write '" + (std::filesystem::path(dir) / name).string() + "'");
    out << text;
  };
  put("replicates.csv", replicates_csv(report));
  put("aggregate.json", aggregate_json(report));
  put("timings.csv", timings_csv(report));
}

}  // namespace cglasso
