#include "shed/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include "shed/diffusion.hpp"
#include "shed/errors.hpp"
#include "shed/replay.hpp"
#include "shed/reward.hpp"
#include "shed/surrogate.hpp"
#include "shed/teacher.hpp"

namespace shed {

namespace fs = std::filesystem;

namespace {

// Stream tags under the run seed.
enum StreamTag : std::uint64_t {
  kTeacherInit = 1,
  kStudentEnv = 2,
  kUniformTeacher = 3,
  kExploration = 4,
  kReplay = 5,
  kDiffusionInit = 6,
  kDiffusionTrain = 7,
  kSynthesis = 8,
  kEvalStreams = 9,
  kTestStreams = 10,
  kStudentInit = 1000,
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::ofstream open_csv(const fs::path& path, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << header << '\n';
  return out;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

long expected_test_evaluations(const RunConfig& c) {
  long per_episode = 1;
  for (int t = 1; t <= c.T_budget; ++t)
    if (t % c.test_every == 0 || t == c.T_budget) ++per_episode;
  return per_episode * c.K_episodes;
}

std::vector<TeacherTransition> sample_batch(const ReplayBuffer& buffer, int n, RandomStream& stream) {
  std::vector<TeacherTransition> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(buffer.sample(stream));
  return out;
}

}  // namespace

TestSet::TestSet(int n, std::uint64_t seed) : set_(make_eval_set(n, seed, EvalSampling::random)) {
  std::uint64_t h = combine_seed(0x7e57, static_cast<std::uint64_t>(n));
  for (const auto& t : set_.thetas)
    for (double v : t.theta) h = combine_seed(h, static_cast<std::uint64_t>(std::llround(v * 1e6)));
  id_ = hex(h);
}

double TestSet::evaluate(const StudentPolicy& pi, std::uint64_t eval_seed, int episodes) {
  ++evaluations_;
  return performance_vector(pi, set_, eval_seed, episodes).mean();
}

nlohmann::json TestSet::manifest() const {
  nlohmann::json j = set_.manifest();
  j["id"] = id_;
  return j;
}

nlohmann::json RunSummary::to_json() const {
  return {{"mode", to_string(mode)},
          {"seed", seed},
          {"completed", completed},
          {"environments_generated", environments_generated},
          {"transition_rows", transition_rows},
          {"test_evaluations", test_evaluations},
          {"final_test", final_test},
          {"test_set_id", test_set_id},
          {"teacher_hash_start", hex(teacher_hash_start)},
          {"teacher_hash_end", hex(teacher_hash_end)},
          {"substitutions", substitutions},
          {"real_transitions", real_transitions},
          {"synthetic_transitions", synthetic_transitions},
          {"error", error}};
}

RunSummary run_curriculum(const RunConfig& config, const fs::path& out) {
  validate(config);
  if (config.mode == Mode::validate_diffusion)
    throw ConfigError("run_curriculum: mode must be shed, hmdp or dr");
  fs::create_directories(out);
  write_json(out / "config.resolved.json", to_json(config));

  const bool is_dr = config.mode == Mode::dr;
  const bool is_shed = config.mode == Mode::shed;
  const double psi = config.mode == Mode::hmdp ? 1.0 : config.psi;

  RandomStream root(config.seed);
  RandomStream teacher_init = root.derive(kTeacherInit);
  RandomStream env_stream = root.derive(kStudentEnv);
  RandomStream uniform_teacher = root.derive(kUniformTeacher);
  RandomStream exploration = root.derive(kExploration);
  RandomStream replay_stream = root.derive(kReplay);
  RandomStream diffusion_init = root.derive(kDiffusionInit);
  RandomStream diffusion_train = root.derive(kDiffusionTrain);
  RandomStream synthesis = root.derive(kSynthesis);
  const std::uint64_t eval_seed = combine_seed(config.seed, kEvalStreams);
  const std::uint64_t test_seed = combine_seed(config.seed, kTestStreams);

  TeacherAgent teacher(config.m, config.teacher.agent, teacher_init);
  const EvalSet eval_set = make_eval_set(config.m, config.eval_set_seed, config.eval_sampling);
  TestSet test_set(config.test_envs, config.test_set_seed);
  write_json(out / "eval_set.json", eval_set.manifest());
  write_json(out / "test_set.json", test_set.manifest());

  ReplayBuffer real(Origin::real, config.teacher.replay_capacity);
  ReplayBuffer synthetic(Origin::synthetic, config.teacher.replay_capacity);
  std::optional<TransitionDiffusion> diffusion;
  std::optional<ActionDiffusion> action_model;
  if (is_shed) {
    diffusion.emplace(config.m, config.diffusion.model, diffusion_init);
    if (config.diffusion.action_source == ActionSource::action_model)
      action_model.emplace(config.m, config.diffusion.model, diffusion_init);
  }
  const RewardFn reward_fn = [&](const PerfVector& s, const EnvParams& a, const PerfVector& s2) {
    return compute_reward(s, a, s2, config.eta, config.reward_mode);
  };

  RunSummary summary;
  summary.mode = config.mode;
  summary.seed = config.seed;
  summary.test_set_id = test_set.id();
  summary.teacher_hash_start = teacher.parameter_hash();

  std::ofstream log = open_csv(out / "training_log.csv",
                               "episode,step,theta_0,theta_1,theta_2,teacher_reward,cv,mean_eval_perf,"
                               "mean_test_perf,wall_ms");
  fs::remove(out / "PARTIAL");

  try {
    for (int ep = 1; ep <= config.K_episodes; ++ep) {
      const auto ep_start = std::chrono::steady_clock::now();
      StudentPolicy student = init_student(combine_seed(config.seed, kStudentInit + ep), config.student);
      PerfVector s = performance_vector(student, eval_set, eval_seed, config.eval_episodes);
      summary.final_test = test_set.evaluate(student, test_seed, config.eval_episodes);
      const auto init_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - ep_start);
      log << ep << ",0,,,,,," << fmt(s.mean()) << ',' << fmt(summary.final_test) << ','
          << fmt(init_ms.count()) << '\n';

      for (int t = 1; t <= config.T_budget; ++t) {
        const auto step_start = std::chrono::steady_clock::now();
        EnvParams a;
        if (is_dr) {
          for (double& v : a.theta) v = uniform_teacher.uniform();
        } else {
          a = teacher.select_action(s, true, exploration);
        }
        const GridEnv env = build_env(a);
        ++summary.environments_generated;
        train_student(student, env, config.C, env_stream);

        const PerfVector s_next = performance_vector(student, eval_set, eval_seed, config.eval_episodes);
        const double cv = compute_cv(s, s_next);
        const double r = reward_fn(s, a, s_next);

        if (!is_dr) {
          real.push({s, a, r, s_next, Origin::real, t == config.T_budget});

          if (is_shed && real.size() >= static_cast<std::size_t>(config.diffusion.min_real)) {
            for (int i = 0; i < config.diffusion.train_steps_per_teacher_step; ++i) {
              const auto batch = sample_batch(real, config.diffusion.batch_size, diffusion_train);
              train_step(*diffusion, batch, diffusion_train);
              if (action_model) train_action_model(*action_model, batch, diffusion_train);
            }
            if (diffusion->model().trained()) {
              for (auto& tr : generate_synthetic_batch(*diffusion, real, config.diffusion.synthetic_per_step,
                                                       reward_fn, synthesis, config.diffusion.action_source,
                                                       action_model ? &*action_model : nullptr))
                synthetic.push(std::move(tr));
            }
          }

          if (real.size() >= static_cast<std::size_t>(config.teacher.warmup)) {
            for (int u = 0; u < config.teacher.updates_per_step; ++u) {
              const MixedBatch mb = sample_mixed(real, synthetic, config.teacher.batch_size, psi, replay_stream);
              summary.substitutions += mb.substituted;
              teacher.ddpg_update(mb.transitions);
            }
          }
        }

        std::string test_field;
        if (t % config.test_every == 0 || t == config.T_budget) {
          summary.final_test = test_set.evaluate(student, test_seed, config.eval_episodes);
          test_field = fmt(summary.final_test);
        }
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - step_start);
        log << ep << ',' << t << ',' << fmt(a.theta[0]) << ',' << fmt(a.theta[1]) << ',' << fmt(a.theta[2])
            << ',' << fmt(r) << ',' << fmt(cv) << ',' << fmt(s_next.mean()) << ',' << test_field << ','
            << fmt(ms.count()) << '\n';
        ++summary.transition_rows;
        s = s_next;
      }
      if (config.dump_qtable) write_q_table_csv(student, (out / ("qtable_ep" + std::to_string(ep) + ".csv")).string());
    }
  } catch (const NumericError& e) {
    log.flush();
    summary.error = e.what();
    summary.test_evaluations = test_set.evaluations();
    std::ofstream(out / "PARTIAL") << e.what() << '\n';
    write_json(out / "run_manifest.json", summary.to_json());
    throw;
  }

  summary.test_evaluations = test_set.evaluations();
  if (summary.test_evaluations != expected_test_evaluations(config))
    throw NumericError("run_curriculum: test set evaluated off cadence");
  summary.teacher_hash_end = teacher.parameter_hash();
  summary.real_transitions = real.size();
  summary.synthetic_transitions = synthetic.size();
  summary.completed = true;
  if (!is_dr) teacher.save(out / "teacher");
  if (diffusion && diffusion->model().trained()) diffusion->model().save(out / "diffusion");
  write_json(out / "run_manifest.json", summary.to_json());
  return summary;
}

RunSummary run_shed(const RunConfig& config, const fs::path& out) {
  if (config.mode != Mode::shed && config.mode != Mode::hmdp)
    throw ConfigError("run_shed: mode must be shed or hmdp");
  return run_curriculum(config, out);
}

RunSummary run_baseline_dr(const RunConfig& config, const fs::path& out) {
  if (config.mode != Mode::dr) throw ConfigError("run_baseline_dr: mode must be dr");
  return run_curriculum(config, out);
}

double standard_error(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  return sample_std(values) / std::sqrt(static_cast<double>(values.size()));
}

SuiteResult run_suite(const RunConfig& config, int n_seeds, const fs::path& out) {
  validate(config);
  if (n_seeds < 1) throw ConfigError("run_suite: need at least one seed");
  if (config.suite_modes.size() * static_cast<std::size_t>(n_seeds) < 2)
    throw ConfigError("run_suite: need at least two runs");
  fs::create_directories(out);

  SuiteResult result;
  for (Mode mode : config.suite_modes) {
    SuiteRow row;
    row.mode = mode;
    std::vector<double> finals;
    for (int i = 0; i < n_seeds; ++i) {
      RunConfig cell = config;
      cell.mode = mode;
      cell.seed = config.seed + static_cast<std::uint64_t>(i);
      const fs::path dir = out / (std::string(to_string(mode)) + "_seed" + std::to_string(cell.seed));
      RunSummary rs;
      try {
        rs = run_curriculum(cell, dir);
        finals.push_back(rs.final_test);
      } catch (const NumericError& e) {
        rs.mode = mode;
        rs.seed = cell.seed;
        rs.error = e.what();
        ++row.n_failed;
      }
      if (result.test_set_id.empty() && !rs.test_set_id.empty()) result.test_set_id = rs.test_set_id;
      if (!rs.test_set_id.empty() && rs.test_set_id != result.test_set_id)
        throw ConfigError("run_suite: runs disagree on the test set");
      result.runs.push_back(rs);
      std::cerr << "[suite] " << to_string(mode) << " seed " << cell.seed
                << (rs.completed ? " final_test=" + fmt(rs.final_test) : " FAILED: " + rs.error) << '\n';
    }
    row.n_seeds = static_cast<int>(finals.size());
    row.mean_final_test = mean_of(finals);
    row.stderr_final_test = standard_error(finals);
    result.rows.push_back(row);
  }

  std::ofstream csv = open_csv(out / "summary.csv", "mode,n_seeds,mean_final_test,stderr_final_test");
  for (const auto& row : result.rows)
    csv << to_string(row.mode) << ',' << row.n_seeds << ',' << fmt(row.mean_final_test) << ','
        << fmt(row.stderr_final_test) << '\n';

  // Comparative trend against domain randomization, reported only.
  const SuiteRow* dr = nullptr;
  for (const auto& row : result.rows)
    if (row.mode == Mode::dr) dr = &row;
  std::ostringstream report;
  result.trend_holds = dr != nullptr;
  if (dr) {
    for (const auto& row : result.rows) {
      if (row.mode == Mode::dr) continue;
      const bool ok = row.n_seeds > 0 && row.mean_final_test >= dr->mean_final_test - 0.02;
      result.trend_holds = result.trend_holds && ok;
      report << to_string(row.mode) << "=" << fmt(row.mean_final_test) << (ok ? " >= " : " < ") << "dr-0.02="
             << fmt(dr->mean_final_test - 0.02) << "; ";
    }
  } else {
    report << "no dr row; trend not evaluated";
  }
  result.trend_report = report.str();

  nlohmann::json runs = nlohmann::json::array();
  for (const auto& rs : result.runs) runs.push_back(rs.to_json());
  write_json(out / "summary.json", {{"test_set_id", result.test_set_id},
                                    {"trend_holds", result.trend_holds},
                                    {"trend_report", result.trend_report},
                                    {"runs", runs}});
  return result;
}

double energy_distance(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty() || y.empty()) throw ConfigError("energy_distance: empty sample");
  auto mean_abs = [](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (double u : a)
      for (double v : b) acc += std::abs(u - v);
    return acc / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
  };
  return 2.0 * mean_abs(x, y) - mean_abs(x, x) - mean_abs(y, y);
}

namespace {

TransitionDiffusion train_on_surrogate(const RunConfig& config, const SurrogateDynamics& f,
                                       std::uint64_t seed, ReplayBuffer* keep) {
  const auto& v = config.validation;
  const int d = v.state_dim;
  RandomStream root(seed);
  RandomStream data = root.derive(1);
  RandomStream init = root.derive(2);
  RandomStream train = root.derive(3);

  Eigen::MatrixXd targets(d, v.train_samples), conds(d + 3, v.train_samples);
  for (int j = 0; j < v.train_samples; ++j) {
    Eigen::VectorXd s(d);
    for (int i = 0; i < d; ++i) s[i] = data.uniform();
    EnvParams a{{data.uniform(), data.uniform(), data.uniform()}};
    const Eigen::VectorXd s_next = f.sample_next(s, a, data);
    targets.col(j) = s_next;
    conds.col(j) = TransitionDiffusion::condition(s, a);
    if (keep) {
      const double r = compute_reward(s, a, s_next, config.eta, config.reward_mode);
      keep->push({s, a, r, s_next, Origin::real, false});
    }
  }

  TransitionDiffusion model(d, config.diffusion.model, init);
  Eigen::MatrixXd bt(d, v.batch_size), bc(d + 3, v.batch_size);
  const double lr0 = model.model().learning_rate();
  const double pi = std::acos(-1.0);
  for (int step = 0; step < v.train_steps; ++step) {
    const double progress = static_cast<double>(step) / v.train_steps;
    model.model().set_learning_rate(
        lr0 * (v.final_lr_fraction + (1.0 - v.final_lr_fraction) * 0.5 * (1.0 + std::cos(pi * progress))));
    for (int j = 0; j < v.batch_size; ++j) {
      const auto idx = static_cast<Eigen::Index>(train.uniform_index(v.train_samples));
      bt.col(j) = targets.col(idx);
      bc.col(j) = conds.col(idx);
    }
    model.model().train_step(bt, bc, train);
  }
  return model;
}

}  // namespace

ValidationResult run_validate_diffusion(const RunConfig& config, const fs::path& out) {
  validate(config);
  if (config.mode != Mode::validate_diffusion)
    throw ConfigError("run_validate_diffusion: mode must be validate_diffusion");
  fs::create_directories(out);
  write_json(out / "config.resolved.json", to_json(config));
  const auto& v = config.validation;
  const int d = v.state_dim;
  ValidationResult result;
  RandomStream root(config.seed);

  std::ofstream val = open_csv(out / "diffusion_val.csv",
                               "noise_scale,dim,real_mean,syn_mean,real_std,syn_std,energy_distance");
  std::string sample_header = "noise_scale,origin,sample";
  for (int i = 0; i < d; ++i) sample_header += ",s" + std::to_string(i);
  std::ofstream samples_csv = open_csv(out / "diffusion_samples.csv", sample_header);

  auto start = std::chrono::steady_clock::now();
  for (std::size_t si = 0; si < v.noise_scales.size(); ++si) {
    const double c = v.noise_scales[si];
    const SurrogateDynamics f(d, c, v.base_sigma, v.surrogate_seed, v.surrogate_hidden);
    const TransitionDiffusion model = train_on_surrogate(config, f, combine_seed(config.seed, 100 + si), nullptr);

    RandomStream held = root.derive(200 + si);
    Eigen::VectorXd s(d);
    for (int i = 0; i < d; ++i) s[i] = held.uniform();
    const EnvParams a{{held.uniform(), held.uniform(), held.uniform()}};

    Eigen::MatrixXd real(d, v.samples);
    for (int j = 0; j < v.samples; ++j) real.col(j) = f.sample_next(s, a, held);
    const Eigen::MatrixXd conds =
        TransitionDiffusion::condition(s, a).replicate(1, v.samples);
    const Eigen::MatrixXd syn = model.model().sample(conds, held);
    result.real_counts.push_back(static_cast<int>(real.cols()));
    result.syn_counts.push_back(static_cast<int>(syn.cols()));

    for (int i = 0; i < d; ++i) {
      std::vector<double> xr, xs;
      for (int j = 0; j < v.samples; ++j) {
        xr.push_back(real(i, j));
        xs.push_back(syn(i, j));
      }
      DistributionRow row{c, i, mean_of(xr), mean_of(xs), sample_std(xr), sample_std(xs), energy_distance(xr, xs)};
      result.rows.push_back(row);
      val << fmt(c) << ',' << i << ',' << fmt(row.real_mean) << ',' << fmt(row.syn_mean) << ','
          << fmt(row.real_std) << ',' << fmt(row.syn_std) << ',' << fmt(row.energy_distance) << '\n';
    }
    for (const auto& [name, mat] : {std::pair<const char*, const Eigen::MatrixXd*>{"real", &real}, {"synthetic", &syn}}) {
      for (int j = 0; j < mat->cols(); ++j) {
        samples_csv << fmt(c) << ',' << name << ',' << j;
        for (int i = 0; i < d; ++i) samples_csv << ',' << fmt((*mat)(i, j));
        samples_csv << '\n';
      }
    }
    std::cerr << "[validate] noise scale " << c << " done\n";
  }
  result.distribution_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  // Small-noise accuracy sweep.
  start = std::chrono::steady_clock::now();
  {
    const SurrogateDynamics f(d, v.small_noise_scale, v.base_sigma, v.surrogate_seed, v.surrogate_hidden);
    ReplayBuffer real_buffer(Origin::real, static_cast<std::size_t>(v.train_samples));
    const TransitionDiffusion model =
        train_on_surrogate(config, f, combine_seed(config.seed, 300), &real_buffer);
    RandomStream held = root.derive(400);
    std::ofstream sn = open_csv(out / "diffusion_small_noise.csv", "pair,dim,true_next,syn_next,abs_error");
    for (int p = 0; p < v.small_noise_pairs; ++p) {
      Eigen::VectorXd s(d);
      for (int i = 0; i < d; ++i) s[i] = held.uniform();
      const EnvParams a{{held.uniform(), held.uniform(), held.uniform()}};
      const Eigen::VectorXd truth = f.mean_next(s, a);
      const Eigen::VectorXd syn = sample_next_state(model, s, a, held);
      for (int i = 0; i < d; ++i) {
        const SmallNoiseRow row{p, i, truth[i], syn[i], std::abs(truth[i] - syn[i])};
        result.small_noise_max_error = std::max(result.small_noise_max_error, row.abs_error);
        result.small_noise.push_back(row);
        sn << p << ',' << i << ',' << fmt(row.true_next) << ',' << fmt(row.syn_next) << ','
           << fmt(row.abs_error) << '\n';
      }
    }

    // Synthetic rewards against rewards recomputed from the noiseless next state.
    const RewardFn reward_fn = [&](const PerfVector& s0, const EnvParams& a0, const PerfVector& s1) {
      return compute_reward(s0, a0, s1, config.eta, config.reward_mode);
    };
    const auto batch = generate_synthetic_batch(model, real_buffer, v.samples, reward_fn, held);
    double mae = 0.0;
    for (const auto& t : batch) mae += std::abs(t.r - reward_fn(t.s, t.a, f.mean_next(t.s, t.a)));
    result.synthetic_reward_mae = mae / static_cast<double>(batch.size());
  }
  result.small_noise_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.rows)
    rows.push_back({{"noise_scale", r.noise_scale}, {"dim", r.dim}, {"real_mean", r.real_mean},
                    {"syn_mean", r.syn_mean}, {"real_std", r.real_std}, {"syn_std", r.syn_std},
                    {"energy_distance", r.energy_distance}});
  write_json(out / "validation_summary.json",
             {{"rows", rows},
              {"real_counts", result.real_counts},
              {"syn_counts", result.syn_counts},
              {"small_noise_max_error", result.small_noise_max_error},
              {"synthetic_reward_mae", result.synthetic_reward_mae},
              {"distribution_seconds", result.distribution_seconds},
              {"small_noise_seconds", result.small_noise_seconds}});
  return result;
}

std::vector<ProbeRow> run_continuity_probes(const EnvParams& theta, const std::vector<double>& deltas,
                                            int random_probes, std::uint64_t seed, const fs::path& out) {
  fs::create_directories(out);
  std::vector<EnvParams> bases{theta};
  RandomStream stream(seed);
  for (int i = 0; i < random_probes; ++i) bases.push_back({{stream.uniform(), stream.uniform(), stream.uniform()}});

  std::vector<ProbeRow> rows;
  std::ofstream csv = open_csv(out / "continuity.csv", "probe,theta_0,theta_1,theta_2,dim,delta,gap");
  for (std::size_t p = 0; p < bases.size(); ++p) {
    const PolicyMatrix policy = value_iteration(build_env(bases[p])).policy();
    for (int dim = 0; dim < 2; ++dim) {
      ProbeRow row{static_cast<int>(p), bases[p], continuity_probe(policy, bases[p], dim, deltas)};
      for (const auto& pt : row.result.curve)
        csv << p << ',' << fmt(bases[p].theta[0]) << ',' << fmt(bases[p].theta[1]) << ','
            << fmt(bases[p].theta[2]) << ',' << dim << ',' << fmt(pt.delta) << ',' << fmt(pt.gap) << '\n';
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace shed
