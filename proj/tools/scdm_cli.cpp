// Command-line front end: constellation/schedule dumps, score training,
// denoising, SNR sweeps, forward scatter, decoder joint training, evaluation.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scdm/scdm.hpp"

namespace {

using namespace scdm;

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> settings;
  std::string output;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "key=value configuration file");
  cmd->add_option("--seed", opt.seed, "master seed");
  cmd->add_option("--set", opt.settings, "override a config key (key=value), repeatable");
  cmd->add_option("-o,--output", opt.output, "output file (default: stdout)");
}

ExperimentConfig resolve(const CommonOptions& opt) {
  ExperimentConfig cfg;
  if (!opt.config_path.empty()) load_config_file(opt.config_path, cfg);
  for (const auto& kv : opt.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.output.empty()) cfg.output = opt.output;
  validate(cfg);
  return cfg;
}

// Writes through `fn(std::ostream&)` to `path`, or stdout when empty.
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  fn(out);
}

std::vector<int> parse_sizes(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : detail::split_list(s)) out.push_back(static_cast<int>(detail::parse_int("hidden", item)));
  if (out.empty()) throw ConfigError("hidden layer list is empty");
  return out;
}

MlpScoreModel load_score_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  Checkpoint ck = read_checkpoint(in);
  if (ck.kind != "score") throw ConfigError("'" + path + "' is a " + ck.kind + " checkpoint, expected score");
  return MlpScoreModel(std::move(ck.net));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Score-based channel denoising for constellation symbols over AWGN"};
  app.require_subcommand(1);

  CommonOptions common;

  auto* c_const = app.add_subcommand("constellation", "dump the constellation as CSV index,re,im,bits");
  add_common(c_const, common);

  auto* c_sched = app.add_subcommand("schedule", "dump the noise schedule as CSV level,sigma");
  add_common(c_sched, common);

  long train_steps = 20000;
  int train_batch = 256;
  double train_lr = 1e-4;
  std::string hidden = "64,64";
  std::string checkpoint_out = "score.ckpt";
  auto* c_train = app.add_subcommand("train-score", "train the score network by denoising score matching");
  add_common(c_train, common);
  c_train->add_option("--steps", train_steps, "optimizer steps");
  c_train->add_option("--batch", train_batch, "symbols per step");
  c_train->add_option("--lr", train_lr, "Adam learning rate");
  c_train->add_option("--hidden", hidden, "hidden layer sizes, comma separated");
  c_train->add_option("--checkpoint", checkpoint_out, "checkpoint to write");

  double snr_db = 0.0;
  std::string checkpoint_in;
  std::string trace_path;
  auto* c_denoise = app.add_subcommand("denoise", "transmit one random sequence and denoise it");
  add_common(c_denoise, common);
  c_denoise->add_option("--snr", snr_db, "channel SNR in dB");
  c_denoise->add_option("--checkpoint", checkpoint_in, "score checkpoint (default: exact oracle)");
  c_denoise->add_option("--trace", trace_path, "write CSV step,sigma,mse_vs_z0");

  auto* c_sweep = app.add_subcommand("sweep", "SNR sweep, CSV snr_db,mode,mse,ser,mmse_bound,trials,seed");
  add_common(c_sweep, common);
  c_sweep->add_option("--checkpoint", checkpoint_in, "score checkpoint for learned_pc");

  int scatter_step = 64;
  int scatter_trials = 1024;
  auto* c_scatter = app.add_subcommand("scatter", "forward-corruption scatter, CSV step,mode,trial,re,im");
  add_common(c_scatter, common);
  c_scatter->add_option("--step", scatter_step, "diffusion step");
  c_scatter->add_option("--trials", scatter_trials, "points per mode");

  long joint_steps = 2000;
  int joint_batch = 32;
  double joint_lr = 1e-4;
  int dims = 16;
  std::string decoder_hidden = "128,128";
  std::string input_mode = "denoised";
  std::string decoder_out = "decoder.ckpt";
  auto* c_joint = app.add_subcommand("joint-train", "retrain the semantic decoder on denoised symbols");
  add_common(c_joint, common);
  c_joint->add_option("--steps", joint_steps, "optimizer steps");
  c_joint->add_option("--batch", joint_batch, "sources per step");
  c_joint->add_option("--lr", joint_lr, "Adam learning rate");
  c_joint->add_option("--dims", dims, "source dimension d (even)");
  c_joint->add_option("--hidden", decoder_hidden, "decoder hidden sizes");
  c_joint->add_option("--input", input_mode, "decoder input: denoised or raw")->check(CLI::IsMember({"denoised", "raw"}));
  c_joint->add_option("--checkpoint", checkpoint_in, "score checkpoint (default: exact oracle)");
  c_joint->add_option("--decoder-out", decoder_out, "decoder checkpoint to write");
  c_joint->add_option("--trace", trace_path, "write CSV step,loss,snr_step");

  std::string field_path;
  std::string decoder_in;
  int eval_sources = 2000;
  auto* c_eval = app.add_subcommand("eval", "compare a score checkpoint with the exact score, or score a decoder");
  add_common(c_eval, common);
  c_eval->add_option("--checkpoint", checkpoint_in, "score checkpoint (default: exact oracle)");
  c_eval->add_option("--field", field_path, "write CSV re,im,sigma,score_re,score_im");
  c_eval->add_option("--decoder", decoder_in, "decoder checkpoint: report reconstruction MSE at --snr");
  c_eval->add_option("--input", input_mode, "decoder input: denoised or raw")->check(CLI::IsMember({"denoised", "raw"}));
  c_eval->add_option("--snr", snr_db, "channel SNR in dB for decoder evaluation");
  c_eval->add_option("--sources", eval_sources, "held-out sources for decoder evaluation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const ExperimentConfig cfg = resolve(common);
    const ConstellationScheme scheme = build_scheme(cfg.order);

    if (c_const->parsed()) {
      emit(cfg.output, [&](std::ostream& os) { write_constellation_csv(os, scheme); });
    } else if (c_sched->parsed()) {
      const NoiseSchedule sched = cfg.schedule();
      emit(cfg.output, [&](std::ostream& os) {
        os << "level,sigma\n";
        for (int i = 1; i <= sched.levels(); ++i) os << i << ',' << fmt_real(sched.sigma(i)) << '\n';
      });
    } else if (c_train->parsed()) {
      DsmConfig dsm;
      dsm.schedule = cfg.schedule();
      dsm.hidden = parse_sizes(hidden);
      dsm.batch_size = train_batch;
      dsm.steps = train_steps;
      dsm.adam.learning_rate = train_lr;
      dsm.seed = cfg.seed;
      const ScoreTraining trained = train_score(scheme, dsm);
      emit(checkpoint_out, [&](std::ostream& os) { write_checkpoint(os, "score", trained.model.net()); });
      emit(cfg.output, [&](std::ostream& os) {
        os << "step,loss\n";
        for (std::size_t k = 0; k < trained.loss_trace.size(); ++k)
          os << k << ',' << fmt_real(trained.loss_trace[k]) << '\n';
      });
    } else if (c_denoise->parsed()) {
      const SamplerConfig sampler = cfg.sampler();
      Rng data = Rng::stream(cfg.seed, 0, 0);
      Rng sampler_rng = Rng::stream(cfg.seed, 0, 1);
      std::vector<int> sent(static_cast<std::size_t>(cfg.symbols));
      for (int& idx : sent) idx = data.uniform_int(0, scheme.order - 1);
      const SymbolSequence z0 = modulate(sent, scheme);
      const SymbolSequence rx = awgn_transmit(z0, snr_to_sigma(snr_db), data);
      DenoiseTrace trace;
      trace.reference = z0;
      SymbolSequence hat;
      if (checkpoint_in.empty()) {
        hat = pc_sample(rx, snr_db, MixtureScoreOracle(scheme), sampler, sampler_rng, &trace);
      } else {
        hat = pc_sample(rx, snr_db, load_score_model(checkpoint_in), sampler, sampler_rng, &trace);
      }
      emit(cfg.output, [&](std::ostream& os) {
        os << "k,sent_re,sent_im,rx_re,rx_im,hat_re,hat_im\n";
        for (std::size_t k = 0; k < z0.size(); ++k)
          os << k << ',' << fmt_real(z0[k].real()) << ',' << fmt_real(z0[k].imag()) << ',' << fmt_real(rx[k].real())
             << ',' << fmt_real(rx[k].imag()) << ',' << fmt_real(hat[k].real()) << ',' << fmt_real(hat[k].imag())
             << '\n';
      });
      if (!trace_path.empty()) emit(trace_path, [&](std::ostream& os) { write_trace_csv(os, trace); });
    } else if (c_sweep->parsed()) {
      ExperimentConfig run = cfg;
      if (!checkpoint_in.empty()) run.checkpoint = checkpoint_in;
      std::unique_ptr<MlpScoreModel> learned;
      if (!run.checkpoint.empty()) {
        learned = std::make_unique<MlpScoreModel>(load_score_model(run.checkpoint));
        bool listed = false;
        for (const auto& m : run.modes) listed |= m == "learned_pc";
        if (!listed) run.modes.push_back("learned_pc");
      }
      const auto records = run_sweep(run, learned.get());
      emit(run.output, [&](std::ostream& os) { write_sweep_csv(os, records); });
    } else if (c_scatter->parsed()) {
      const auto rows = emit_scatter(cfg, scatter_step, scatter_trials);
      emit(cfg.output, [&](std::ostream& os) { write_scatter_csv(os, rows); });
    } else if (c_joint->parsed()) {
      const QuantizingEncoder enc(scheme);
      if (dims < 2 || dims % 2 != 0) throw ConfigError("--dims must be a positive even number");
      Rng init = Rng::stream(cfg.seed, 7, 0);
      DecoderModel dec = DecoderModel::create(dims / 2, dims, parse_sizes(decoder_hidden), init);
      JointTrainConfig jt;
      jt.steps = joint_steps;
      jt.batch_size = joint_batch;
      jt.adam.learning_rate = joint_lr;
      jt.input = input_mode == "raw" ? DecoderInput::raw : DecoderInput::denoised;
      jt.seed = cfg.seed;
      const SamplerConfig sampler = cfg.sampler();
      const JointTraining trained =
          checkpoint_in.empty() ? joint_train(enc, std::move(dec), MixtureScoreOracle(scheme), sampler, jt)
                                : joint_train(enc, std::move(dec), load_score_model(checkpoint_in), sampler, jt);
      emit(decoder_out, [&](std::ostream& os) { write_checkpoint(os, "decoder", trained.decoder.net()); });
      const std::string trace_target = trace_path.empty() ? cfg.output : trace_path;
      emit(trace_target, [&](std::ostream& os) {
        os << "step,loss,snr_step\n";
        for (const auto& row : trained.trace) os << row.step << ',' << fmt_real(row.loss) << ',' << row.snr_step << '\n';
      });
    } else if (c_eval->parsed()) {
      const MixtureScoreOracle oracle(scheme);
      std::optional<MlpScoreModel> model;
      if (!checkpoint_in.empty()) model = load_score_model(checkpoint_in);
      if (!decoder_in.empty()) {
        std::ifstream in(decoder_in);
        if (!in) throw ConfigError("cannot open decoder checkpoint '" + decoder_in + "'");
        Checkpoint ck = read_checkpoint(in);
        if (ck.kind != "decoder") throw ConfigError("'" + decoder_in + "' is not a decoder checkpoint");
        const DecoderModel dec(std::move(ck.net));
        const QuantizingEncoder enc(scheme);
        const SamplerConfig sampler = cfg.sampler();
        double acc = 0.0;
        for (int s = 0; s < eval_sources; ++s) {
          Rng data = Rng::stream(cfg.seed, 1000000 + static_cast<std::uint64_t>(s), 0);
          Rng srng = Rng::stream(cfg.seed, 1000000 + static_cast<std::uint64_t>(s), 1);
          const SourceVector x = draw_source(dec.dims(), data);
          const SymbolSequence rx = awgn_transmit(enc.encode(x), snr_to_sigma(snr_db), data);
          SymbolSequence input = rx;
          if (input_mode == "denoised")
            input = model ? pc_sample(rx, snr_db, *model, sampler, srng) : pc_sample(rx, snr_db, oracle, sampler, srng);
          const SourceVector xh = decode(input, dec);
          for (std::size_t k = 0; k < x.size(); ++k) acc += (x[k] - xh[k]) * (x[k] - xh[k]);
        }
        emit(cfg.output, [&](std::ostream& os) {
          os << "snr_db,input,reconstruction_mse\n"
             << fmt_real(snr_db) << ',' << input_mode << ','
             << fmt_real(acc / (static_cast<double>(eval_sources) * dec.dims())) << '\n';
        });
      } else {
        const std::vector<double> sigmas{0.05, 0.3, 1.0, 3.0, 8.0};
        if (model) {
          const FieldComparison cmp = relative_l2(*model, oracle, sigmas);
          emit(cfg.output, [&](std::ostream& os) {
            os << "sigma,relative_l2\n";
            for (std::size_t k = 0; k < sigmas.size(); ++k)
              os << fmt_real(sigmas[k]) << ',' << fmt_real(cmp.per_sigma[k]) << '\n';
            os << "pooled," << fmt_real(cmp.pooled) << '\n';
          });
        }
        if (!field_path.empty()) {
          emit(field_path, [&](std::ostream& os) {
            if (model) write_score_field_csv(os, *model, sigmas, 3.0, 25);
            else write_score_field_csv(os, oracle, sigmas, 3.0, 25);
          });
        }
      }
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericalDivergence& e) {
    std::fprintf(stderr, "numerical divergence: %s\n", e.what());
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
