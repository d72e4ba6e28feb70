#include <cstdio>
#include <exception>
#include <limits>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

void add_hyperparams(CLI::App* cmd, pbci::cli::TrainArgs& a) {
  auto& hp = a.options.hp;
  cmd->add_option("--manifest", a.manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", a.out, "write the report to <out>.txt and <out>.csv");
  cmd->add_option("--save-model", a.save_model, "also train one model on a 70:10:20 split and save it here");
  cmd->add_option("--epochs", hp.epochs, "training epochs")->capture_default_str();
  cmd->add_option("--lr", hp.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--weight-decay", hp.weight_decay, "weight decay")->capture_default_str();
  cmd->add_flag("--decoupled", hp.decoupled_weight_decay, "apply weight decay AdamW-style");
  cmd->add_option("--batch-size", hp.batch_size, "minibatch size")->capture_default_str();
  cmd->add_option("--seed", hp.seed, "run seed")->capture_default_str();
  cmd->add_option("--folds", a.options.folds, "cross-validation folds")->capture_default_str();
  cmd->add_option("--inner-val", a.options.inner_val_fraction, "validation share inside each fold")
      ->capture_default_str();
  cmd->add_flag("-v,--verbose", a.verbose, "log every fold");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace pbci::cli;
  CLI::App app{"pbci: EEG user identification, intention decoding and personalized dispatch"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic EEGD dataset");
  s->add_option("--preset", synth.preset, "easy or hard")->capture_default_str();
  s->add_option("--seed", synth.seed, "dataset seed")->capture_default_str();
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--subjects", synth.subjects, "number of subjects");
  s->add_option("--trials", synth.trials, "trials per (subject, paradigm, label)");
  s->add_option("--snr-db", synth.snr_db, "burst SNR in dB");
  s->add_flag("--noise-only", synth.noise_only, "omit class signals");

  PrepArgs prep;
  auto* p = app.add_subcommand("prep", "band-pass filter and rescale every epoch of a manifest");
  p->add_option("--in", prep.in, "input manifest")->required()->check(CLI::ExistingFile);
  p->add_option("--out", prep.out, "output manifest")->required();
  p->add_option("--low", prep.low, "low cutoff (Hz)")->capture_default_str();
  p->add_option("--high", prep.high, "high cutoff (Hz)")->capture_default_str();
  p->add_option("--order", prep.order, "prototype order")->capture_default_str();
  p->add_option("--factor", prep.factor, "amplitude factor")->capture_default_str();
  p->add_flag("--causal", prep.causal, "single forward pass instead of filtfilt");

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "check a manifest against the acquisition protocol");
  v->add_option("--manifest", val.manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
  v->add_option("--per-cell", val.per_cell, "expected trials per cell")->capture_default_str();
  v->add_option("--subjects", val.subjects, "expected subjects")->capture_default_str();
  bool no_parse = false;
  v->add_flag("--no-parse", no_parse, "check file existence only");

  TrainArgs tid;
  auto* ti = app.add_subcommand("train-id", "cross-validated user identification");
  add_hyperparams(ti, tid);
  ti->add_flag("--per-paradigm", tid.options.per_paradigm, "one model per paradigm");

  TrainArgs tin;
  auto* tn = app.add_subcommand("train-intent", "cross-validated intention classification");
  add_hyperparams(tn, tin);
  tn->add_option("--split", tin.split, "per-subject or cross-subject")
      ->check(CLI::IsMember({"per-subject", "cross-subject"}))
      ->capture_default_str();

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "print a result CSV as an aligned table");
  r->add_option("csv", rep.csv, "table CSV")->required()->check(CLI::ExistingFile);
  r->add_option("--precision", rep.precision, "decimal places")->capture_default_str();

  DispatchArgs dis;
  auto* d = app.add_subcommand("dispatch", "identify the user and intent of an epoch and resolve the action");
  d->add_option("--model-f", dis.model_f, "identification model")->required()->check(CLI::ExistingFile);
  d->add_option("--model-g", dis.model_g, "intention model")->required()->check(CLI::ExistingFile);
  d->add_option("--store", dis.store, "preference store")->required()->check(CLI::ExistingFile);
  d->add_option("--registry", dis.registry, "action registry")->required()->check(CLI::ExistingFile);
  auto* one = d->add_option("--epoch", dis.epoch, "single EEGD epoch")->check(CLI::ExistingFile);
  auto* many = d->add_option("--manifest", dis.manifest, "manifest for batch mode")->check(CLI::ExistingFile);
  one->excludes(many);
  d->add_option("--tau", dis.tau, "confidence threshold")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  val.parse_files = !no_parse;

  try {
    if (s->parsed()) return run_synth(synth);
    if (p->parsed()) return run_prep(prep);
    if (v->parsed()) return run_validate(val);
    if (ti->parsed()) return run_train_id(tid);
    if (tn->parsed()) return run_train_intent(tin);
    if (r->parsed()) return run_report(rep);
    if (d->parsed()) {
      if (dis.epoch.empty() && dis.manifest.empty()) {
        std::fprintf(stderr, "dispatch: one of --epoch or --manifest is required\n");
        return 2;
      }
      return run_dispatch(dis);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
