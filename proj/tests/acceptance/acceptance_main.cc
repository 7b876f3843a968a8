/*
 * Copyright 2026 The FedSim Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Acceptance checks: one [PASS]/[FAIL] line per criterion, exit status 1 if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fedsim/data.h"
#include "fedsim/error.h"
#include "fedsim/experiment.h"
#include "fedsim/format.h"
#include "fedsim/idx.h"
#include "fedsim/metrics.h"
#include "fedsim/model.h"
#include "fedsim/param_math.h"
#include "fedsim/random.h"
#include "fedsim/records.h"
#include "fedsim/shapley.h"
#include "fedsim/strategies.h"
#include "oracles.h"

namespace fedsim {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

double phi_sum(const RoundShapley& r) { return std::accumulate(r.phi.begin(), r.phi.end(), 0.0); }

RoundValueTable random_table(Rng& rng, int n) {
  RoundValueTable t(n);
  for (SubsetMask s = 0; s < (SubsetMask{1} << n); ++s) t.set(s, rng.uniform(-1.0, 1.0));
  return t;
}

// Shapley axioms, oracle agreement and efficiency on real federations.
Outcome ac1(const ScenarioResult& desk) {
  Outcome o;
  const auto start = Clock::now();
  double worst_eff = 0.0;
  std::size_t rounds = 0;
  for (const CellResult& c : desk.cells) {
    for (const SampleSet* set : {&c.msm, &c.fr}) {
      for (const RunRecord& r : set->runs) {
        for (const RoundRecord& round : r.rounds) {
          worst_eff = std::max(worst_eff, std::abs(phi_sum(round.shapley) -
                                                   (round.shapley.full_value - round.shapley.empty_value)));
          ++rounds;
        }
        o.check(is_valid_contribution(r.contributions.values()), "contribution postconditions");
      }
    }
  }
  o.check(worst_eff <= 1e-9, "efficiency");

  Rng rng(1);
  double worst_oracle = 0.0, worst_sym = 0.0, worst_dummy = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 6;
    const RoundValueTable t = random_table(rng, n);
    const std::vector<double> phi = exact_shapley(t, n).phi;
    const std::vector<double> ref =
        oracle::shapley_by_permutations(n, [&](std::uint64_t s) { return t.get(s); });
    for (int i = 0; i < n; ++i) worst_oracle = std::max(worst_oracle, std::abs(phi[i] - ref[i]));

    if (n >= 2) {
      // Players 0 and 1 enter only through their count; the last one never matters.
      const RoundValueTable base = random_table(rng, n);
      RoundValueTable sym(n), dummy(n);
      const SubsetMask last = SubsetMask{1} << (n - 1);
      for (SubsetMask s = 0; s < (SubsetMask{1} << n); ++s) {
        SubsetMask canon = s;
        if (((s & 1) != 0) != ((s & 2) != 0)) canon = (s & ~SubsetMask{3}) | 1;
        sym.set(s, base.get(canon));
        dummy.set(s, base.get(s & ~last));
      }
      const std::vector<double> ps = exact_shapley(sym, n).phi;
      worst_sym = std::max(worst_sym, std::abs(ps[0] - ps[1]));
      worst_dummy = std::max(worst_dummy, std::abs(exact_shapley(dummy, n).phi[n - 1]));
    }
  }
  o.check(worst_oracle <= 1e-12, "oracle equivalence");
  o.check(worst_sym <= 1e-12, "symmetry");
  o.check(worst_dummy <= 1e-12, "dummy");
  const double secs = seconds_since(start);
  o.check(secs < 10.0, "runtime");
  o.note("efficiency max " + fmt(worst_eff) + " over " + std::to_string(rounds) +
         " rounds, oracle max " + fmt(worst_oracle) + ", symmetry max " + fmt(worst_sym) +
         ", dummy max " + fmt(worst_dummy) + ", " + fmt(secs, 3) + " s");
  return o;
}

Outcome ac2() {
  Outcome o;
  RoundValueTable t(3);
  const double v[8] = {0.5, 0.6, 0.7, 0.8, 0.6, 0.7, 0.8, 0.9};
  for (SubsetMask s = 0; s < 8; ++s) t.set(s, v[s]);
  const std::vector<double> exact = exact_shapley(t, 3).phi;
  const std::vector<double> ref =
      oracle::shapley_by_permutations(3, [&](std::uint64_t s) { return t.get(s); });
  const std::vector<double> mc = mc_shapley([&](SubsetMask s) { return t.get(s); }, 3, 2000, 42).phi;
  const double want[3] = {0.1, 0.2, 0.1};
  double err_exact = 0, err_mc = 0;
  for (int i = 0; i < 3; ++i) {
    o.check(std::abs(ref[i] - want[i]) <= 1e-12, "brute-force oracle");
    err_exact = std::max(err_exact, std::abs(exact[i] - want[i]));
    err_mc = std::max(err_mc, std::abs(mc[i] - want[i]));
  }
  o.check(err_exact <= 1e-12, "exact");
  o.check(err_mc <= 0.02, "mc");
  o.note("exact phi = (" + fmt(exact[0], 6) + ", " + fmt(exact[1], 6) + ", " + fmt(exact[2], 6) +
         "), mc max error " + fmt(err_mc, 3));
  return o;
}

Outcome ac3() {
  Outcome o;
  double worst_l = 0, worst_m = 0;
  const ModelArch logistic{ModelKind::kLogistic, 8, 16, 4};
  const ModelArch mlp{ModelKind::kMlp1, 8, 16, 4};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<double> x(8);
    for (double& v : x) v = rng.uniform(-2, 2);
    const int label = static_cast<int>(rng.below(4));
    for (const ModelArch* arch : {&logistic, &mlp}) {
      ParamVec p = init_params(*arch, seed);
      for (std::size_t k = 0; k < p.dim(); ++k) p[k] += rng.uniform(-0.5, 0.5);
      const double e = numeric_grad_check(*arch, p, x, label);
      (arch == &logistic ? worst_l : worst_m) = std::max(arch == &logistic ? worst_l : worst_m, e);
    }
  }
  o.check(worst_l <= 1e-5, "logistic");
  o.check(worst_m <= 1e-5, "mlp1");
  o.note("max error logistic " + fmt(worst_l) + ", mlp1 " + fmt(worst_m) + " over 20 seeds");
  return o;
}

Outcome ac4() {
  Outcome o;
  const std::vector<ClientUpdate> avg{{0, ParamVec{0, 2}, 6}, {1, ParamVec{2, 0}, 6}};
  o.check(aggregate(StrategyKind::kFedAvg, {}, {}, ParamVec{5, 5}, avg).global == ParamVec({1, 1}),
          "FedAvg mean");

  StrategyHyper h;
  h.server_lr = 0.1;
  const std::vector<ClientUpdate> one{{0, ParamVec{1.0}, 1}};
  const double step = aggregate(StrategyKind::kFedAdam, h, {}, ParamVec{0.0}, one).global[0];
  const double oracle_step = 0.1 * 0.1 / (std::sqrt(0.01) + 1e-3);
  o.check(std::abs(step - oracle_step) <= 1e-12, "FedAdam step");

  StrategyHyper kh;
  kh.krum_f = 1;
  const std::vector<ClientUpdate> krum{{0, ParamVec{0.0}, 1}, {1, ParamVec{0.1}, 1},
                                       {2, ParamVec{0.3}, 1}, {3, ParamVec{10.0}, 1}};
  o.check(aggregate(StrategyKind::kKrum, kh, {}, ParamVec{0.0}, krum).global == ParamVec({0.0}),
          "Krum selection");

  Rng rng(9);
  bool hull = true;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ClientUpdate> u;
    const int m = 2 + static_cast<int>(rng.below(7));
    for (int i = 0; i < m; ++i) {
      ParamVec p(4);
      for (std::size_t k = 0; k < 4; ++k) p[k] = rng.uniform(-5, 5);
      u.push_back(ClientUpdate{i, p, 1 + rng.below(20)});
    }
    for (StrategyKind kind : {StrategyKind::kFedMedian, StrategyKind::kFedTrimmedAvg}) {
      const ParamVec out = aggregate(kind, {}, {}, ParamVec(4), u).global;
      for (std::size_t k = 0; k < 4; ++k) {
        double lo = u[0].params[k], hi = lo;
        for (const ClientUpdate& c : u) {
          lo = std::min(lo, c.params[k]);
          hi = std::max(hi, c.params[k]);
        }
        hull &= out[k] >= lo && out[k] <= hi;
      }
    }
  }
  o.check(hull, "hull containment");

  double worst_fixed = 0;
  const ParamVec g{0.4, -1.1, 3.0};
  const std::vector<ClientUpdate> fixed{{0, g, 3}, {1, g, 5}, {2, g, 7}, {3, g, 2}};
  for (StrategyKind kind : kMsmPool) {
    StrategyState state;
    ParamVec cur = g;
    for (int t = 0; t < 5; ++t) {
      const AggregateResult r = aggregate(kind, {}, state, cur, fixed);
      worst_fixed = std::max(worst_fixed, linf_dist(r.global, g));
      cur = r.global;
      state = r.state;
    }
  }
  o.check(worst_fixed <= 1e-12, "fixed point");
  o.note("FedAdam step " + format_double(step) + ", fixed-point max drift " + fmt(worst_fixed));
  return o;
}

std::string serialize(const RunRecord& r, const FederationConfig& cfg) {
  return cli::dump_json(cli::run_record_to_json(r, cfg));
}

Outcome ac5(const ScenarioConfig& scenario, const ScenarioResult& serial,
            const std::string& serial_csv) {
  Outcome o;
  FederationConfig cfg = expand_grid(scenario)[0].config;
  cfg.strategy = StrategyKind::kFedRandom;
  const std::string a = serialize(run_federation(cfg), cfg);
  const std::string b = serialize(run_federation(cfg), cfg);
  o.check(a == b, "byte-identical run records");

  const auto start = Clock::now();
  const ScenarioResult parallel = run_scenario(scenario, 8);
  const std::string parallel_csv = cli::render_report_csv(cli::report_rows(parallel));
  o.check(parallel_csv == serial_csv, "workers 1 vs 8 CSV");
  bool cells_equal = parallel.cells.size() == serial.cells.size();
  for (std::size_t i = 0; cells_equal && i < serial.cells.size(); ++i) {
    cells_equal = cli::dump_json(cli::cell_record_to_json(serial.cells[i])) ==
                  cli::dump_json(cli::cell_record_to_json(parallel.cells[i]));
  }
  o.check(cells_equal, "workers 1 vs 8 cell records");
  o.note("run record " + std::to_string(a.size()) + " bytes, CSV " +
         std::to_string(serial_csv.size()) + " bytes, 8-worker grid " + fmt(seconds_since(start), 3) + " s");
  return o;
}

Outcome ac6(const ScenarioResult& desk, double secs) {
  Outcome o;
  const CriterionSummary& s = desk.summary.at(Criterion::kAvgStd);
  const std::size_t cells = desk.summary.cell_count();
  const double rate = static_cast<double>(s.wins) / static_cast<double>(cells);
  o.check(cells == 18, "18 cells");
  o.check(rate >= 0.70, "FR lower avg_std in >= 70% of cells");
  o.check(secs < 900.0, "runtime");
  double msm_mean = 0, fr_mean = 0;
  for (const CellResult& c : desk.cells) {
    msm_mean += *c.msm_metrics.avg_std / static_cast<double>(cells);
    fr_mean += *c.fr_metrics.avg_std / static_cast<double>(cells);
  }
  o.note("FR lower in " + std::to_string(s.wins) + "/" + std::to_string(cells) + " (" +
         fmt(100 * rate, 3) + "%), mean avg_std MSM " + fmt(msm_mean) + " vs FR " + fmt(fr_mean) +
         ", sign-test p " + fmt(s.p_value.value_or(1.0)) + ", " + fmt(secs, 3) + " s");
  return o;
}

// Recount everything from the CSV text alone.
Outcome ac7(const ScenarioResult& desk, const std::string& csv) {
  Outcome o;
  const std::vector<cli::ReportRow> rows = cli::parse_report_csv(csv);
  o.check(rows.size() == 2 * desk.cells.size(), "two CSV rows per cell");
  std::map<std::string, std::pair<const cli::ReportRow*, const cli::ReportRow*>> cells;
  for (const cli::ReportRow& r : rows) {
    auto& slot = cells[r.scenario_id];
    (r.method == "MSM" ? slot.first : slot.second) = &r;
  }
  std::string detail;
  for (Criterion c : kCriteria) {
    int wins = 0, losses = 0, ties = 0;
    for (const auto& [id, pair] : cells) {
      const auto pick = [&](const cli::ReportRow* r) -> std::optional<double> {
        if (c == Criterion::kAvgStd) return r->avg_std;
        return c == Criterion::kL2 ? r->l2 : r->linf;
      };
      const auto m = pick(pair.first), f = pick(pair.second);
      if (!m || !f || *m == *f) ++ties;
      else if (*f < *m) ++wins;
      else ++losses;
    }
    const CriterionSummary& s = desk.summary.at(c);
    const std::string name(criterion_name(c));
    o.check(s.wins == wins && s.losses == losses && s.ties == ties, name + " counts");
    const double p = oracle::binomial_upper_tail(wins + losses, wins);
    o.check(s.p_value && std::abs(*s.p_value - p) <= 1e-12, name + " p-value");
    if (c != Criterion::kAvgStd) {
      detail += (detail.empty() ? "" : ", ") + name + " FR wins " + std::to_string(wins) + "/" +
                std::to_string(wins + losses + ties) + " p=" + fmt(p);
    }
  }
  o.note(detail + " (reported, not asserted)");
  return o;
}

Outcome ac8(const ScenarioConfig& desk) {
  Outcome o;
  ScenarioConfig s = desk;
  s.epochs = {1};
  s.base.rounds = 30;
  std::vector<StrategyKind> kinds(kMsmPool.begin(), kMsmPool.end());
  kinds.push_back(StrategyKind::kFedRandom);
  std::map<StrategyKind, double> worst;
  for (StrategyKind k : kinds) worst[k] = 1.0;
  std::map<std::string, Dataset> cache;
  for (const ScenarioCell& cell : expand_grid(s)) {
    auto it = cache.find(cell.dataset);
    if (it == cache.end()) it = cache.emplace(cell.dataset, cell.config.dataset.materialize()).first;
    const FederationData data = prepare_data(cell.config, it->second);
    for (StrategyKind k : kinds) {
      const FederationConfig cfg = k == StrategyKind::kFedRandom ? fedrandom_member_config(cell.config, 0)
                                                                 : msm_member_config(cell.config, k);
      const std::vector<double> trace = run_federation(cfg, data).accuracy_trace();
      const double best = *std::max_element(trace.begin(), trace.end());
      worst[k] = std::min(worst[k], best);
      o.check(best >= 0.5, cell.id + " " + std::string(strategy_name(k)));
    }
  }
  std::string detail = "worst best-accuracy over alpha {1,10,100} x 3 seeds:";
  for (StrategyKind k : kinds) detail += " " + std::string(strategy_name(k)) + "=" + fmt(worst[k], 3);
  o.note(detail);
  return o;
}

Outcome ac9(const ScenarioConfig& desk) {
  Outcome o;
  std::map<StrategyKind, int> counts;
  for (std::uint64_t t = 1; t <= 10000; ++t) ++counts[fedrandom_choose(kFedRandomPool, fedrandom_round_seed(42, t))];
  int lo = 10000, hi = 0;
  for (StrategyKind k : kFedRandomPool) {
    lo = std::min(lo, counts[k]);
    hi = std::max(hi, counts[k]);
  }
  o.check(lo >= 1800 && hi <= 2200, "draw counts in [1800, 2200]");

  const ScenarioCell cell = expand_grid(desk)[0];
  const FederationData data = prepare_data(cell.config, cell.config.dataset.materialize());
  const SampleSet runs = run_fedrandom_samples(cell.config, data, 30);
  std::set<std::vector<StrategyKind>> distinct;
  for (const RunRecord& r : runs.runs) distinct.insert(r.choice_sequence());
  o.check(distinct.size() >= 25, ">= 25 distinct choice sequences");
  o.note("counts in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], " +
         std::to_string(distinct.size()) + "/30 distinct sequences (r=" +
         std::to_string(cell.config.rounds) + ")");
  return o;
}

Outcome ac10() {
  Outcome o;
  bool conserved = true;
  double gap1 = 0, gap100 = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (double alpha : {1.0, 10.0, 100.0}) {
      const auto parts = dirichlet_partition_indices(1000, PartitionSpec{5, alpha, seed, 1});
      std::vector<std::size_t> all;
      std::size_t lo = 1000, hi = 0;
      for (const auto& p : parts) {
        all.insert(all.end(), p.begin(), p.end());
        lo = std::min(lo, p.size());
        hi = std::max(hi, p.size());
      }
      std::sort(all.begin(), all.end());
      for (std::size_t i = 0; i < all.size(); ++i) conserved &= all[i] == i;
      conserved &= all.size() == 1000;
      if (alpha == 1.0) gap1 += static_cast<double>(hi - lo) / 50;
      if (alpha == 100.0) gap100 += static_cast<double>(hi - lo) / 50;
    }
  }
  o.check(conserved, "conservation");
  o.check(gap1 > gap100, "alpha-monotone spread");

  // Handcrafted IDX fixture: two 28x28 images (all 0, all 255), labels 0, 1.
  std::vector<std::uint8_t> images{0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 28, 0, 0, 0, 28};
  images.insert(images.end(), 784, 0x00);
  images.insert(images.end(), 784, 0xff);
  const std::vector<std::uint8_t> labels{0, 0, 8, 1, 0, 0, 0, 2, 0, 1};
  const fs::path dir = fs::temp_directory_path() / "fedsim_acceptance_idx";
  fs::create_directories(dir);
  const auto put = [&](const char* name, const std::vector<std::uint8_t>& bytes) {
    std::ofstream(dir / name, std::ios::binary)
        .write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    return dir / name;
  };
  const Dataset ds = load_idx(put("images", images), put("labels", labels));
  std::vector<std::uint8_t> pixels;
  for (double v : ds.features) pixels.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
  std::vector<std::uint8_t> ys(ds.labels.begin(), ds.labels.end());
  o.check(encode_idx_images(2, 28, 28, pixels) == images && encode_idx_labels(ys) == labels,
          "IDX bit-exact round trip");
  fs::remove_all(dir);
  o.note("mean max-min gap alpha=1 " + fmt(gap1) + " vs alpha=100 " + fmt(gap100));
  return o;
}

int run() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> checks;
  const ScenarioConfig desk = default_desk_scenario();
  const auto start = Clock::now();
  const ScenarioResult serial = run_scenario(desk, 1);
  const double desk_secs = seconds_since(start);
  const std::string csv = cli::render_report_csv(cli::report_rows(serial));

  checks.emplace_back("AC1 Shapley correctness suite", [&] { return ac1(serial); });
  checks.emplace_back("AC2 toy-game regression", ac2);
  checks.emplace_back("AC3 gradient checks", ac3);
  checks.emplace_back("AC4 strategy unit suite", ac4);
  checks.emplace_back("AC5 determinism and parallelism", [&] { return ac5(desk, serial, csv); });
  checks.emplace_back("AC6 desk-scale avg_std direction", [&] { return ac6(serial, desk_secs); });
  checks.emplace_back("AC7 comparison summary pipeline", [&] { return ac7(serial, csv); });
  checks.emplace_back("AC8 convergence sanity", [&] { return ac8(desk); });
  checks.emplace_back("AC9 randomization checks", [&] { return ac9(desk); });
  checks.emplace_back("AC10 partition and IDX properties", ac10);

  int failures = 0;
  for (const auto& [name, fn] : checks) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(checks.size()) - failures, checks.size());
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace fedsim

int main() { return fedsim::run(); }
