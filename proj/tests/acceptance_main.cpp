// Acceptance suite: one verification per line, each with its pinned
// tolerance. Runs the real training pipeline on synthetic data, so expect a
// few minutes of wall time. Usage: acceptance_tests <path-to-cli> [--only N]
//
//  1 gradient correctness    analytic BPTT vs central differences, 20 configs
//  2 analytic loss values    closed-form values of the three loss terms
//  3 metric oracle           eval metrics vs brute-force enumeration, 100 cases
//  4 sampler properties      coverage, uniformity (chi-square), window cover
//  5 causality & streaming   prefix equality incl. the CLI stream command
//  6 synthetic end-to-end    anticipation >= 0.90 late, Avg Acc w/o bg >= 0.80
//  7 qualitative trends      clip-length and multi-task comparison table
//  8 determinism             bit-identical checkpoints and reports

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sact/checkpoint.hpp"
#include "sact/eval.hpp"
#include "sact/pipeline.hpp"
#include "sact/synth.hpp"
#include "test_util.hpp"

using namespace sact;
namespace fs = std::filesystem;

namespace {

std::string g_cli_path;

struct Criterion {
  int id;
  const char* name;
  bool (*run)(std::string& detail);
};

std::string run_command(const std::string& command) {
  std::string output;
  FILE* pipe = popen((command + " 2>/dev/null").c_str(), "r");
  if (pipe == nullptr) throw Error("popen failed for: " + command);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
  const int rc = pclose(pipe);
  if (rc != 0) throw Error("command failed (" + std::to_string(rc) + "): " + command);
  return output;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

LoadedDataset default_synth_dataset(int test_sequences = 5) {
  SynthConfig synth;  // C=5, J=4, 20 train / 5 test, T=600, lengths 60..140
  synth.test_sequences = test_sequences;
  auto gen = synth_generate(synth, 1);
  return dataset_from_memory(gen.manifest, std::move(gen.train), std::move(gen.test));
}

// --------------------------------------------------------------------------
// 1. gradient correctness

bool criterion_gradients(std::string& detail) {
  Rng rng(0xacce97);
  double worst = 0.0;
  const double combos[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  for (int i = 0; i < 20; ++i) {
    const auto [alpha, beta] = std::pair(combos[i % 4][0], combos[i % 4][1]);
    const auto gc = sact_test::random_grad_case(rng, alpha, beta);
    worst = std::max(worst, grad_check(gc.params, gc.clip, gc.spec(), 1e-3));
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max relative error %.3e over 20 configs (limit 1e-4)",
                worst);
  detail = buf;
  return worst <= 1e-4;
}

// --------------------------------------------------------------------------
// 2. analytic loss values

bool criterion_loss_values(std::string& detail) {
  bool ok = true;

  const int classes = 52;
  const Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(4, classes, 1.0 / classes);
  ok &= std::abs(loss_classification(uniform, {0, 51, 13, 7}) - std::log(52.0)) <= 1e-9;

  const Eigen::VectorXd half = Eigen::VectorXd::Constant(6, 0.5);
  ok &= std::abs(loss_actionness(half, {1, 0, 1, 0, 1, 1}) - std::log(2.0)) <= 1e-9;

  const int h = 9;
  Eigen::MatrixXd hidden = Eigen::MatrixXd::Random(5, h);
  const Eigen::VectorXd rep = hidden.row(3).transpose();
  Eigen::MatrixXd same = hidden;
  for (int t = 1; t <= 3; ++t) same.row(t) = rep.transpose();
  const std::vector<std::pair<CoveredSpan, const Eigen::VectorXd*>> covered{{{0, 1, 3}, &rep}};
  ok &= loss_full_rep(same, covered, Eigen::MatrixXd::Identity(h, h)) == 0.0;

  Clip clip;
  clip.frames = Eigen::MatrixXd::Zero(3, 2);
  clip.labels = {0, 2, 1};
  clip.actionness = {0, 1, 1};
  Eigen::MatrixXd probs(3, 4);
  probs << 0.7, 0.1, 0.1, 0.1,
           0.2, 0.3, 0.4, 0.1,
           0.25, 0.5, 0.2, 0.05;
  Eigen::VectorXd q(3);
  q << 0.2, 0.8, 0.9;
  const LossSpec off{0.0, 0.0, nullptr};
  const auto total = loss_total(probs, q, hidden, clip, Eigen::MatrixXd::Identity(h, h), off);
  ok &= total.total == loss_classification(probs, clip.labels);

  detail = "ln(C+1), ln 2, zero residual and alpha=beta=0 degeneracy all exact";
  return ok;
}

// --------------------------------------------------------------------------
// 3. metric oracle equivalence

bool criterion_metric_oracle(std::string& detail) {
  Rng rng(0x0eac1e);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto oc = sact_test::random_oracle_case(rng);
    std::vector<PredictionStream> streams;
    std::vector<const UntrimmedSequence*> seqs;
    std::vector<std::vector<int>> tracks;
    for (std::size_t s = 0; s < oc.seqs.size(); ++s) {
      PredictionStream ps;
      ps.probs = oc.probs[s];
      ps.actionness = Eigen::VectorXd::Constant(oc.probs[s].rows(), 0.5);
      streams.push_back(std::move(ps));
      seqs.push_back(&oc.seqs[s]);
      tracks.push_back(derive_frame_labels(oc.seqs[s], oc.num_classes));
    }
    std::vector<const std::vector<int>*> track_ptrs;
    for (const auto& t : tracks) track_ptrs.push_back(&t);

    const auto impl = anticipation_accuracy(streams, seqs, 10, InstanceRule::kLastFrame);
    const auto want = sact_test::oracle_anticipation(oc, 10);
    for (std::size_t k = 0; k < impl.size(); ++k) {
      if (std::isnan(want[k]) != std::isnan(impl[k])) return false;
      if (!std::isnan(want[k])) worst = std::max(worst, std::abs(impl[k] - want[k]));
    }
    for (const bool with_bg : {true, false}) {
      const double a = frame_accuracy(streams, track_ptrs, with_bg);
      const double b = sact_test::oracle_frame_accuracy(oc, with_bg);
      if (std::isnan(a) != std::isnan(b)) return false;
      if (!std::isnan(a)) worst = std::max(worst, std::abs(a - b));
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |impl - oracle| %.3e over 100 cases (limit 1e-12)",
                worst);
  detail = buf;
  return worst <= 1e-12;
}

// --------------------------------------------------------------------------
// 4. sampler properties

bool criterion_sampler(std::string& detail) {
  const ActionInstance inst{300, 400, 1};
  Rng rng(0x5a301e);
  std::map<int, long> counts;
  for (int i = 0; i < 10000; ++i) {
    const int start = action_centric_start(1000, inst, 50, 25, rng);
    // every clip must intersect [s - w, e + w]
    if (start > inst.end + 25 || start + 49 < inst.start - 25) {
      detail = "a clip missed the action-centric interval";
      return false;
    }
    ++counts[start];
  }
  if (counts.begin()->first < 275 || counts.rbegin()->first > 376) {
    detail = "draws escaped the admissible start range";
    return false;
  }
  const int bins = 376 - 275 + 1;
  const double expected = 10000.0 / bins;
  double chi2 = 0.0;
  for (int s = 275; s <= 376; ++s) {
    const double diff = static_cast<double>(counts[s]) - expected;
    chi2 += diff * diff / expected;
  }
  const double critical = sact_test::chi_square_critical(bins - 1, 0.001);

  std::vector<int> hit(220, 0);
  for (const int start : sliding_window_starts(220, 50, 50)) {
    for (int t = start; t < start + 50; ++t) ++hit[static_cast<std::size_t>(t - 1)];
  }
  for (const int hits : hit) {
    if (hits < 1) {
      detail = "sliding windows left a frame uncovered";
      return false;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "10000 draws in range, chi2 %.1f < %.1f (df %d, sig 0.001), windows cover",
                chi2, critical, bins - 1);
  detail = buf;
  return chi2 < critical;
}

// --------------------------------------------------------------------------
// 5. causality and streaming equivalence (library + CLI)

bool criterion_causality(std::string& detail) {
  ModelConfig mc;
  mc.input_dim = 6;
  mc.hidden = 12;
  mc.layers = 3;
  mc.num_classes = 4;
  Rng rng(0xca05a1);
  const ModelParams params = ModelParams::init(mc, rng);
  Eigen::MatrixXd frames(20, mc.input_dim);
  for (int t = 0; t < 20; ++t) {
    for (int d = 0; d < mc.input_dim; ++d) frames(t, d) = rng.normal();
  }
  const auto base = forward_clip(params, frames);

  for (const int t : {3, 11, 19}) {
    Eigen::MatrixXd perturbed = frames;
    for (int u = t; u < 20; ++u) perturbed.row(u).array() += 11.0;
    const auto fwd = forward_clip(params, perturbed);
    for (int u = 0; u < t; ++u) {
      if (fwd.probs.row(u) != base.probs.row(u) || fwd.actionness(u) != base.actionness(u)) {
        detail = "future frames leaked into past outputs";
        return false;
      }
    }
  }

  StreamState state = StreamState::initial(mc);
  for (int t = 0; t < 20; ++t) {
    const StepOutput step = stream_step(params, state, frames.row(t).transpose());
    if (step.probs.transpose() != base.probs.row(t) ||
        step.actionness != base.actionness(t)) {
      detail = "stream_step diverged from forward_clip";
      return false;
    }
  }

  // CLI: stream rows equal the eval dump rows for the same file
  sact_test::TempDir dir("accept5");
  run_command(g_cli_path + " synth --classes 3 --joints 2 --train-seqs 2 --test-seqs 1" +
              " --frames 150 --instances 2 --min-len 20 --max-len 30 --seed 11 --out " +
              dir.file("data"));
  run_command(g_cli_path + " train --manifest " + dir.file("data/manifest.txt") +
              " --hidden 16 --layers 2 --clip-len 20 --context-window 10 --epochs 2" +
              " --alpha 0 --beta 0 --seed 4 --out-dir " + dir.file("run"));
  run_command(g_cli_path + " eval --checkpoint " + dir.file("run/final.ckpt") +
              " --manifest " + dir.file("data/manifest.txt") + " --dump-dir " +
              dir.file("dumps"));
  const std::string streamed = run_command(
      g_cli_path + " stream --checkpoint " + dir.file("run/final.ckpt") + " --skeleton " +
      dir.file("data/seq_002.skel"));
  const std::string dumped = read_file(dir.file("dumps/seq_002.pred.csv"));

  std::istringstream s_in(streamed), d_in(dumped);
  std::string s_line, d_line;
  std::getline(s_in, s_line);  // headers
  std::getline(d_in, d_line);
  int rows = 0;
  while (std::getline(s_in, s_line)) {
    if (!std::getline(d_in, d_line)) {
      detail = "dump has fewer rows than the stream";
      return false;
    }
    // dump columns: frame,true_label,argmax,p_max,q -> drop true_label
    const auto c1 = d_line.find(',');
    const auto c2 = d_line.find(',', c1 + 1);
    const std::string projected = d_line.substr(0, c1) + d_line.substr(c2);
    if (s_line != projected) {
      detail = "stream row differs from dump row: " + s_line + " vs " + d_line;
      return false;
    }
    ++rows;
  }
  if (std::getline(d_in, d_line)) {
    detail = "stream has fewer rows than the dump";
    return false;
  }
  detail = "prefix outputs exact; " + std::to_string(rows) + " CLI rows identical";
  return rows == 150;
}

// --------------------------------------------------------------------------
// 6. synthetic end-to-end

bool criterion_end_to_end(std::string& detail) {
  const auto ds = default_synth_dataset();
  RunConfig cfg;  // defaults: L=50, w=25, H=100, 3 layers, lr 1e-3, 30 epochs
  cfg.alpha = 0.0;
  cfg.beta = 0.0;
  cfg.seed = 1;
  const TrainResult result = train_student(ds, cfg, nullptr);
  const MetricsReport report = evaluate_params(result.final_params, ds, cfg);

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "gamma 0.7/0.8/0.9 = %.3f/%.3f/%.3f (need >= 0.90), w/o bg %.3f (need >= 0.80)",
                report.anticipation[6], report.anticipation[7], report.anticipation[8],
                report.avg_acc_without_bg);
  detail = buf;
  return report.anticipation[6] >= 0.90 && report.anticipation[7] >= 0.90 &&
         report.anticipation[8] >= 0.90 && report.avg_acc_without_bg >= 0.80;
}

// --------------------------------------------------------------------------
// 7. qualitative trend report (directional; the table itself is the artifact)

bool criterion_trends(std::string& detail) {
  const auto ds = default_synth_dataset(10);

  auto run = [&ds](int clip_len, double alpha, int epochs, std::uint64_t seed) {
    RunConfig cfg;
    cfg.hidden = 64;
    cfg.epochs = epochs;
    cfg.seed = seed;
    cfg.clip_len = clip_len;
    cfg.alpha = alpha;
    cfg.beta = 0.0;
    cfg.teacher_epochs = 20;
    cfg.eval_mode = "stitch";  // windowed test protocol, matches training clips
    return run_experiment(ds, cfg).report;
  };

  struct Arm {
    const char* name;
    int clip_len;
    double alpha;
    int epochs;
  };
  const Arm arms[] = {
      {"L10", 10, 0.0, 15}, {"L200", 200, 0.0, 15}, {"base_L50", 50, 0.0, 30},
      {"fac_L50", 50, 1.0, 30}};

  std::printf("    arm,seed,gamma01,gamma05,gamma09,avg_acc_wo_bg\n");
  std::map<std::string, double> mean01;
  for (const auto& arm : arms) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const MetricsReport r = run(arm.clip_len, arm.alpha, arm.epochs, seed);
      std::printf("    %s,%llu,%.3f,%.3f,%.3f,%.3f\n", arm.name,
                  static_cast<unsigned long long>(seed), r.anticipation[0], r.anticipation[4],
                  r.anticipation[8], r.avg_acc_without_bg);
      std::fflush(stdout);
      mean01[arm.name] += r.anticipation[0] / 5.0;
    }
  }
  std::printf("    mean gamma01: L10 %.3f, L200 %.3f, base %.3f, fac %.3f\n",
              mean01["L10"], mean01["L200"], mean01["base_L50"], mean01["fac_L50"]);

  const bool trend_a = mean01["L10"] >= mean01["L200"];
  const bool trend_b = mean01["fac_L50"] >= mean01["base_L50"] - 0.02;
  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "(a) short-clip early advantage %s (%.3f vs %.3f); "
                "(b) multi-task margin %+.3f vs -0.02 tolerance %s [directional, reported "
                "but not gated]",
                trend_a ? "holds" : "MISSED", mean01["L10"], mean01["L200"],
                mean01["fac_L50"] - mean01["base_L50"], trend_b ? "holds" : "missed");
  detail = buf;
  return trend_a;  // (b) is directional-only; emitted above regardless
}

// --------------------------------------------------------------------------
// 8. determinism

bool criterion_determinism(std::string& detail) {
  auto full_run = [](std::string& ckpt_bytes, std::string& report_csv) {
    SynthConfig synth;
    synth.train_sequences = 6;
    synth.test_sequences = 2;
    synth.frames_per_sequence = 300;
    synth.instances_per_sequence = 2;
    auto gen = synth_generate(synth, 21);
    const auto ds = dataset_from_memory(gen.manifest, std::move(gen.train), std::move(gen.test));
    RunConfig cfg;
    cfg.hidden = 32;
    cfg.layers = 2;
    cfg.epochs = 3;
    cfg.teacher_epochs = 3;
    cfg.alpha = 1.0;
    cfg.beta = 1.0;
    cfg.seed = 9;
    const ExperimentResult ex = run_experiment(ds, cfg);
    ckpt_bytes = serialize_checkpoint(
        params_to_checkpoint(ex.train.final_params, config_snapshot(ds, cfg)));
    report_csv = report_to_csv(ex.report);
  };
  std::string ckpt_a, report_a, ckpt_b, report_b;
  full_run(ckpt_a, report_a);
  full_run(ckpt_b, report_b);
  if (ckpt_a != ckpt_b) {
    detail = "checkpoints differ between identical runs";
    return false;
  }
  if (report_a != report_b) {
    detail = "reports differ between identical runs";
    return false;
  }
  detail = "teacher+train+eval twice: checkpoint and report bytes identical (" +
           std::to_string(ckpt_a.size()) + " checkpoint bytes)";
  return true;
}

const Criterion kCriteria[] = {
    {1, "gradient correctness", criterion_gradients},
    {2, "analytic loss values", criterion_loss_values},
    {3, "metric oracle equivalence", criterion_metric_oracle},
    {4, "sampler properties", criterion_sampler},
    {5, "causality and streaming equivalence", criterion_causality},
    {6, "synthetic end-to-end training", criterion_end_to_end},
    {7, "qualitative trend report", criterion_trends},
    {8, "determinism", criterion_determinism},
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-sact-cli> [--only N]\n", argv[0]);
    return 2;
  }
  g_cli_path = argv[1];
  int only = 0;
  if (argc >= 4 && std::string(argv[2]) == "--only") only = std::atoi(argv[3]);

  int failures = 0;
  for (const auto& criterion : kCriteria) {
    if (only != 0 && criterion.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
      pass = criterion.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s -- %s (%.1fs)\n", pass ? "PASS" : "FAIL", criterion.id,
                criterion.name, detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
