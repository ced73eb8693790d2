// Command-line front end for the experiments: sample, tower, spectra,
// hausdorff and resolve. Exit codes: 0 pass, 1 assertion or budget failure,
// 2 usage or parse error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "treelift/grouporder.hpp"
#include "treelift/parallel.hpp"
#include "treelift/resolver.hpp"
#include "treelift/spectral.hpp"

namespace {

using namespace treelift;
using Json = nlohmann::ordered_json;

constexpr const char* kVersion = "1";

struct ExperimentConfig {
  std::string group = "cyclic";
  int arity = 2;
  int rank = 2;
  std::string words;  // empty: the whole free group
  int depth = 8;
  int k = 2;
  int trunc = 2;
  std::string seeds = "1";
  std::size_t samples = 0;
  std::string out = "-";
  unsigned jobs = 1;
  std::size_t attempts = 256;
  std::size_t budget = 1u << 14;
  // assertions; zero disables
  int max_components = 0;
  double min_gap = 0;
  double min_gamma = 0;
  double min_success = 0;
  double alpha = 1e-3;
  double control_alpha = 1e-6;
};

// Reads a flat JSON object whose keys are the long flag names.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& is) const override {
    Json j;
    try {
      j = Json::parse(is);
    } catch (const Json::exception& e) {
      throw CLI::ConversionError("config", e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config", "top level must be an object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      item.name = key;
      if (value.is_string()) {
        item.inputs = {value.get<std::string>()};
      } else if (value.is_array()) {
        std::string joined;
        for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
        item.inputs = {joined};
      } else {
        item.inputs = {value.dump()};
      }
      items.push_back(std::move(item));
    }
    return items;
  }
};

// "1,4,10-12" -> 1 4 10 11 12
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part.erase(0, part.find_first_not_of(" \t"));
    part.erase(part.find_last_not_of(" \t") + 1);
    if (part.empty()) continue;
    try {
      std::size_t used = 0;
      const auto dash = part.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoull(part, &used));
        if (used != part.size()) throw std::invalid_argument(part);
      } else {
        const auto lo = std::stoull(part.substr(0, dash));
        const auto hi = std::stoull(part.substr(dash + 1));
        if (hi < lo) throw std::invalid_argument(part);
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw Error("seeds: cannot parse '" + part + "'");
    }
  }
  return out;
}

struct Setup {
  PermGroup group;
  std::vector<FreeWord> words;
  std::vector<std::uint64_t> seeds;
};

Setup validate(const ExperimentConfig& cfg) {
  if (cfg.arity < 2) throw Error("arity must be at least 2");
  if (cfg.rank < 1) throw Error("rank must be at least 1");
  if (cfg.depth < 0) throw Error("depth must be non-negative");
  if (cfg.group != "sym" && cfg.group != "cyclic") throw Error("group must be 'sym' or 'cyclic'");
  Setup s{cfg.group == "sym" ? PermGroup::symmetric(cfg.arity) : PermGroup::cyclic(cfg.arity), {}, parse_seeds(cfg.seeds)};
  if (cfg.words.empty()) {
    for (int i = 1; i <= cfg.rank; ++i) s.words.push_back(FreeWord::generator(cfg.rank, i));
  } else {
    s.words = parse_words(cfg.words, cfg.rank);
  }
  return s;
}

std::vector<Portrait> generators(const Setup& s, const ExperimentConfig& cfg, std::uint64_t seed, int depth) {
  auto rng = derive_stream(seed, 0);
  std::vector<Portrait> gens;
  for (int i = 0; i < cfg.rank; ++i) gens.push_back(sample_haar(s.group, TreeShape(cfg.arity, depth), rng));
  return gens;
}

// Runs `body` once per seed, possibly in parallel, and joins the outputs in
// seed order.
template <class Fn>
std::string per_seed(const Setup& s, unsigned jobs, Fn&& body) {
  std::vector<std::string> parts(s.seeds.size());
  parallel_for(s.seeds.size(), jobs, [&](std::size_t i) { parts[i] = body(i, s.seeds[i]); });
  std::string all;
  for (const auto& p : parts) all += p;
  return all;
}

struct Outcome {
  std::string text;
  std::vector<std::string> failures;
};

Outcome cmd_sample(const ExperimentConfig& cfg, const Setup& s) {
  Outcome o;
  o.text = "# treelift sample v" + std::string(kVersion) + "\n";
  o.text += per_seed(s, cfg.jobs, [&](std::size_t, std::uint64_t seed) {
    std::ostringstream os;
    os << "seed " << seed << '\n';
    for (const auto& g : generators(s, cfg, seed, cfg.depth)) write_portrait(os, g);
    return os.str();
  });
  return o;
}

Outcome cmd_tower(const ExperimentConfig& cfg, const Setup& s) {
  Outcome o;
  o.text = "# treelift tower v" + std::string(kVersion) + "\nseed,n,components,stable_from\n";
  std::vector<std::vector<std::size_t>> counts(s.seeds.size());
  o.text += per_seed(s, cfg.jobs, [&](std::size_t i, std::uint64_t seed) {
    const auto gens = generators(s, cfg, seed, cfg.depth);
    auto& c = counts[i];
    for (int n = 1; n <= cfg.depth; ++n) c.push_back(components(build_schreier(s.words, build_schreier(gens, n))).count());
    std::size_t from = c.size();
    while (from > 0 && c[from - 1] == c.back()) --from;
    std::ostringstream os;
    for (std::size_t n = 0; n < c.size(); ++n) os << seed << ',' << n + 1 << ',' << c[n] << ',' << from + 1 << '\n';
    return os.str();
  });
  if (cfg.max_components > 0)
    for (std::size_t i = 0; i < counts.size(); ++i)
      for (auto c : counts[i])
        if (c > static_cast<std::size_t>(cfg.max_components)) {
          o.failures.push_back("seed " + std::to_string(s.seeds[i]) + ": " + std::to_string(c) + " components");
          break;
        }
  return o;
}

Outcome cmd_spectra(const ExperimentConfig& cfg, const Setup& s) {
  Outcome o;
  std::vector<double> gaps(s.seeds.size());
  const double degree = 2.0 * cfg.rank;
  std::ostringstream head;
  write_scan_csv(head, {}, true);
  o.text = head.str();
  o.text += per_seed(s, cfg.jobs, [&](std::size_t i, std::uint64_t seed) {
    const auto rows = expander_scan(generators(s, cfg, seed, cfg.depth), cfg.depth, seed);
    gaps[i] = min_normalized_gap(rows, degree);
    std::ostringstream os;
    write_scan_csv(os, rows, false);
    return os.str();
  });
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    std::cerr << "seed " << s.seeds[i] << " min normalized gap " << gaps[i] << '\n';
    if (cfg.min_gap > 0 && !(gaps[i] > cfg.min_gap))
      o.failures.push_back("seed " + std::to_string(s.seeds[i]) + ": gap " + std::to_string(gaps[i]));
  }
  return o;
}

Outcome cmd_hausdorff(const ExperimentConfig& cfg, const Setup& s) {
  Outcome o;
  std::vector<double> tail(s.seeds.size());
  std::ostringstream head;
  write_density_csv(head, 0, {}, true);
  o.text = head.str();
  o.text += per_seed(s, cfg.jobs, [&](std::size_t i, std::uint64_t seed) {
    const auto gens = generators(s, cfg, seed, cfg.depth);
    const auto seq = density_sequence(s.words, gens, s.group, cfg.depth, {cfg.budget, seed});
    tail[i] = seq.liminf_estimate;
    std::ostringstream os;
    write_density_csv(os, seed, seq, false);
    return os.str();
  });
  for (std::size_t i = 0; i < tail.size(); ++i) {
    std::cerr << "seed " << s.seeds[i] << " tail min gamma " << tail[i] << '\n';
    if (cfg.min_gamma > 0 && !(tail[i] > cfg.min_gamma))
      o.failures.push_back("seed " + std::to_string(s.seeds[i]) + ": gamma " + std::to_string(tail[i]));
  }
  return o;
}

std::string delta_word(const FreeWord& w) {
  if (w.empty()) return "1";
  std::string out;
  for (const auto& l : w.letters()) {
    if (!out.empty()) out += ' ';
    out += "w" + std::to_string(l.gen) + (l.exp < 0 ? "^-1" : "");
  }
  return out;
}

Json chi_json(const ChiSquare& c) {
  return Json{{"chi2", c.statistic}, {"df", c.df}, {"p", c.p_value}, {"min_expected", c.min_expected}};
}

Outcome cmd_resolve(const ExperimentConfig& cfg, const Setup& s) {
  Outcome o;
  const ResolverOptions ropt{cfg.depth, cfg.attempts};
  std::vector<Json> runs(s.seeds.size());
  parallel_for(s.seeds.size(), cfg.jobs, [&](std::size_t i) {
    const auto seed = s.seeds[i];
    const auto gens = generators(s, cfg, seed, cfg.depth);
    auto rng = derive_stream(seed, 1);
    Json run{{"seed", seed}};
    try {
      const auto res = find_configuration(gens, s.words, cfg.k, rng, ropt);
      const auto a = audit(gens, res);
      resolve(gens, res);  // throws if the two routes disagree
      run["N"] = res.level;
      run["audit"] = a.ok;
      if (!a.ok) run["audit_failure"] = a.failure;
      Json comps = Json::array();
      const auto t = res.words.size();
      for (const auto& c : res.components) {
        Json alphas = Json::array();
        Json expanded = Json::array();
        for (const auto& w : c.loop_words) {
          alphas.push_back(delta_word(w));
          expanded.push_back(to_string(expand(w, res.words)));
        }
        Json marked = Json::array();
        for (auto e : c.marked) marked.push_back({e / static_cast<EdgeId>(cfg.rank), e % static_cast<EdgeId>(cfg.rank) + 1});
        Json reps = Json::array();
        for (auto f : c.representatives) reps.push_back({f / t, f % t + 1});
        comps.push_back(Json{{"v", c.base_vertex},
                             {"alpha_words", alphas},
                             {"alpha_in_F", expanded},
                             {"marked_edges", marked},
                             {"representatives", reps}});
      }
      run["components"] = comps;
    } catch (const ResolverError& e) {
      run["N"] = nullptr;
      run["error"] = e.what();
      run["blocking_condition"] = e.condition();
    }
    runs[i] = std::move(run);
  });

  Json report{{"format", std::string("treelift-resolve/") + kVersion},
              {"config",
               {{"group", s.group.name()},
                {"arity", cfg.arity},
                {"rank", cfg.rank},
                {"words", cfg.words},
                {"depth", cfg.depth},
                {"K", cfg.k},
                {"trunc", cfg.trunc},
                {"samples", cfg.samples}}}};
  std::size_t resolved = 0;
  for (const auto& r : runs) {
    if (!r["N"].is_null()) ++resolved;
    if (r.contains("audit") && !r["audit"].get<bool>())
      o.failures.push_back("seed " + std::to_string(r["seed"].get<std::uint64_t>()) + ": audit failed");
  }
  report["runs"] = runs;
  report["resolved"] = resolved;
  if (!s.seeds.empty() && static_cast<double>(resolved) < cfg.min_success * static_cast<double>(s.seeds.size()))
    o.failures.push_back("resolved " + std::to_string(resolved) + " of " + std::to_string(s.seeds.size()));

  if (cfg.samples > 0 && !s.seeds.empty()) {
    HaarConfig hc;
    hc.group = s.group;
    hc.rank = cfg.rank;
    hc.words = s.words;
    hc.k = cfg.k;
    hc.truncation = cfg.trunc;
    hc.samples = cfg.samples;
    hc.seed = s.seeds.front();
    hc.resolver = ropt;
    hc.jobs = cfg.jobs;
    const auto rep = verify_haar(hc);
    Json marg = Json::array();
    for (const auto& m : rep.marginals) marg.push_back(chi_json(m));
    Json h{{"runs", rep.runs},
           {"resolved", rep.resolved},
           {"cells", rep.joint_cells},
           {"chi2", rep.joint.statistic},
           {"df", rep.joint.df},
           {"p", rep.joint.p_value},
           {"marginals", marg},
           {"level_histogram", rep.level_histogram}};
    if (cfg.k >= 2) h["control"] = chi_json(rep.control);
    report["haar_test"] = h;
    if (!(rep.joint.p_value > cfg.alpha)) o.failures.push_back("joint uniformity rejected, p = " + std::to_string(rep.joint.p_value));
    if (cfg.k >= 2 && !(rep.control.p_value < cfg.control_alpha))
      o.failures.push_back("negative control not rejected, p = " + std::to_string(rep.control.p_value));
  } else {
    report["haar_test"] = nullptr;
  }
  o.text = report.dump(2) + "\n";
  return o;
}

void emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error("write to '" + path + "' failed");
}

}  // namespace

int main(int argc, char** argv) {
  ExperimentConfig cfg;
  CLI::App app{"Random subgroups of tree automorphism groups: experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file whose keys mirror the long flags");
  app.set_version_flag("--version", std::string("treelift ") + kVersion);

  app.add_option("--group", cfg.group, "Local group: sym or cyclic")->capture_default_str();
  app.add_option("--arity", cfg.arity, "Tree arity d")->capture_default_str();
  app.add_option("--rank", cfg.rank, "Number m of Haar generators")->capture_default_str();
  app.add_option("--words", cfg.words, "Subgroup words, comma separated, e.g. \"x1 x2, x2 x1\"");
  app.add_option("--depth", cfg.depth, "Tree depth or maximal level")->capture_default_str();
  app.add_option("--K", cfg.k, "Number of resolved loops")->capture_default_str();
  app.add_option("--trunc", cfg.trunc, "Truncation depth m* for the Haar test")->capture_default_str();
  app.add_option("--seeds", cfg.seeds, "Seeds, e.g. 1,2,10-20")->capture_default_str();
  app.add_option("--samples", cfg.samples, "Runs for the Haar test (0 skips it)")->capture_default_str();
  app.add_option("--out", cfg.out, "Output file, - for stdout")->capture_default_str();
  app.add_option("--jobs", cfg.jobs, "Worker threads")->capture_default_str();
  app.add_option("--attempts", cfg.attempts, "Random candidates per component and level")->capture_default_str();
  app.add_option("--budget", cfg.budget, "Permutation degree budget")->capture_default_str();
  app.add_option("--max-components", cfg.max_components, "tower: fail above this count");
  app.add_option("--min-gap", cfg.min_gap, "spectra: fail at or below this normalized gap");
  app.add_option("--min-gamma", cfg.min_gamma, "hausdorff: fail at or below this tail gamma");
  app.add_option("--min-success", cfg.min_success, "resolve: fail below this resolved fraction");
  app.add_option("--alpha", cfg.alpha, "resolve: fail when the joint p-value is at or below this")->capture_default_str();
  app.add_option("--control-alpha", cfg.control_alpha, "resolve: the negative control must fall below this")
      ->capture_default_str();

  using Command = Outcome (*)(const ExperimentConfig&, const Setup&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands{
      {"sample", "Draw Haar portraits and print them", cmd_sample},
      {"tower", "Component counts of Y_n per level", cmd_tower},
      {"spectra", "Expander scan of X_n as CSV", cmd_spectra},
      {"hausdorff", "Density sequence gamma_n as CSV", cmd_hausdorff},
      {"resolve", "Configurations, audits and the Haar test as JSON", cmd_resolve},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const auto setup = validate(cfg);
    for (const auto& [name, help, fn] : commands) {
      if (!app.got_subcommand(name)) continue;
      const auto outcome = fn(cfg, setup);
      emit(cfg.out, outcome.text);
      for (const auto& f : outcome.failures) std::cerr << "FAIL " << f << '\n';
      return outcome.failures.empty() ? 0 : 1;
    }
  } catch (const BudgetError& e) {
    std::cerr << "budget: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
