#include "specquant/dataset_io.hpp"
#include "specquant/error.hpp"
#include "specquant/evaluation.hpp"
#include "specquant/gas_library.hpp"
#include "specquant/model_io.hpp"
#include "specquant/parallel.hpp"
#include "specquant/plot_export.hpp"
#include "specquant/spectra_csv.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace specquant;

namespace {

struct ModelOptions {
  Eigen::Index components = 9;
  std::string flavor = "fpca";
  bool uncentered = false;
  int retain = 1;
  std::string library;
  std::string b_mode = "known";
  double path_length = kDefaultPathLengthCm;
  std::string noise_mode = "zero";
  bool tf_centered = false;
  std::size_t calibration_samples = 0;
  double ridge = 0.0;
  Eigen::Index plsr_components = 20;
  double plsr_tolerance = 1e-10;
  int plsr_max_iterations = 500;
};

void add_model_options(CLI::App* sub, ModelOptions& o) {
  sub->add_option("--components", o.components, "Number of principal components for LR and direct models");
  sub->add_option("--flavor", o.flavor, "PCA flavor: fpca (trapezoidal weighting) or pca")
      ->check(CLI::IsMember({"fpca", "pca"}));
  sub->add_flag("--uncentered", o.uncentered, "Do not subtract the mean before LR/direct PCA");
  sub->add_option("--retain", o.retain, "Leading Lambda entries kept per gas by the direct model");
  sub->add_option("--library", o.library, "Gas library directory (required for tf)");
  sub->add_option("--b-mode", o.b_mode, "TF path length: known or learn")
      ->check(CLI::IsMember({"known", "learn"}));
  sub->add_option("--path-length", o.path_length, "Known path length b in cm (TF)");
  sub->add_option("--noise-mode", o.noise_mode, "TF noise projection N': zero or learn")
      ->check(CLI::IsMember({"zero", "learn"}));
  sub->add_flag("--tf-centered", o.tf_centered, "Fit the TF basis on centered extinction spectra");
  sub->add_option("--calibration-samples", o.calibration_samples,
                  "TF calibrates on only the first n training samples (0: all)");
  sub->add_option("--ridge", o.ridge, "Ridge added to the TF system matrix");
  sub->add_option("--plsr-components", o.plsr_components, "PLSR latent components");
  sub->add_option("--plsr-tolerance", o.plsr_tolerance, "NIPALS convergence tolerance");
  sub->add_option("--plsr-max-iterations", o.plsr_max_iterations, "NIPALS inner iteration limit");
}

std::shared_ptr<const GasLibrary> maybe_library(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const GasLibrary>(load_library(path));
}

ModelSpec build_spec(const std::string& kind, const ModelOptions& o,
                     const std::shared_ptr<const GasLibrary>& lib) {
  LrSpec lr{o.components, parse_flavor(o.flavor), !o.uncentered};
  if (kind == "lr") return lr;
  if (kind == "direct") return DirectSpec{lr, o.retain};
  if (kind == "tf") {
    if (!lib) throw Error(ErrorCode::kConfiguration, "the tf model needs --library");
    TfSpec tf;
    tf.library = lib;
    tf.options.flavor = parse_flavor(o.flavor);
    tf.options.centered = o.tf_centered;
    tf.options.b_mode = o.b_mode == "learn" ? PathLengthMode::kLearn : PathLengthMode::kKnown;
    tf.options.path_length_cm = o.path_length;
    tf.options.noise_mode = o.noise_mode == "learn" ? NoiseMode::kLearn : NoiseMode::kZero;
    tf.options.ridge = o.ridge;
    if (o.calibration_samples > 0) tf.calibration_samples = o.calibration_samples;
    return tf;
  }
  if (kind == "plsr") {
    return PlsrSpec{{o.plsr_components, o.plsr_tolerance, o.plsr_max_iterations, true}};
  }
  if (kind == "mean") return MeanSpec{};
  throw Error(ErrorCode::kConfiguration, "unknown model '" + kind + "'");
}

std::vector<ModelSpec> build_specs(const std::vector<std::string>& kinds, const ModelOptions& o,
                                   const std::shared_ptr<const GasLibrary>& lib) {
  std::vector<ModelSpec> specs;
  for (const auto& k : kinds) specs.push_back(build_spec(k, o, lib));
  return specs;
}

SpectraDataset read_dataset(const std::string& path, const std::shared_ptr<const GasLibrary>& lib) {
  return load_dataset(path, lib.get());
}

nlohmann::json resolved_config(const CLI::App& root, const std::vector<const CLI::App*>& chain,
                               int threads, int argc, char** argv) {
  nlohmann::json cfg;
  std::string command;
  for (const auto* app : chain) command += (command.empty() ? "" : " ") + app->get_name();
  cfg["command"] = command;
  cfg["threads"] = threads;
  std::vector<std::string> args(argv + 1, argv + argc);
  cfg["argv"] = args;
  nlohmann::json options = nlohmann::json::object();
  for (const auto* app : chain) {
    for (const CLI::Option* opt : app->get_options()) {
      const std::string key = opt->get_single_name();
      if (key.empty() || key == "help" || key == "help-all" || key == "threads") continue;
      if (opt->get_type_size() == 0) {
        options[key] = opt->count() > 0;
      } else if (opt->count() > 0) {
        const auto& res = opt->results();
        if (opt->get_expected_max() > 1) {
          options[key] = res;
        } else {
          options[key] = res.back();
        }
      } else {
        options[key] = opt->get_default_str();
      }
    }
  }
  (void)root;
  cfg["options"] = options;
  return cfg;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<double> to_std(const Vector& v) { return {v.begin(), v.end()}; }

nlohmann::json report_json(const EvalReport& r) {
  return {{"model", r.model},
          {"dataset", r.dataset},
          {"gas_names", r.gas_names},
          {"per_gas_rmse", to_std(r.per_gas_rmse)},
          {"mean_rmse", r.mean_rmse},
          {"per_gas_mape", to_std(r.per_gas_mape)},
          {"mape_excluded", r.mape_excluded},
          {"random_guess_rmse", to_std(r.random_guess_rmse)},
          {"fold_count", r.fold_count},
          {"fold_mean_rmse", to_std(r.fold_mean_rmse)},
          {"fold_fingerprints", r.fold_fingerprints}};
}

void write_predictions(const fs::path& path, const RowMatrix& c, const std::vector<std::string>& names) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_matrix_csv(path, c, names);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specquant: synthetic absorption spectra, (functional) PCA and concentration quantification"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  std::optional<int> threads_flag;
  app.add_option("--threads", threads_flag,
                 "Worker threads (default: SPECQUANT_THREADS, else all cores); output never depends on it")
      ->check(CLI::PositiveNumber);

  // gen-library
  auto* gen_lib = app.add_subcommand("gen-library", "Synthesize the nine-gas extinction library");
  std::uint64_t lib_seed = 0;
  std::string lib_out, lib_profile;
  double grid_min = 2.5, grid_max = 14.0;
  std::size_t grid_points = 1000;
  gen_lib->add_option("--seed", lib_seed, "Random seed for line placement");
  gen_lib->add_option("--out", lib_out, "Output directory")->required();
  gen_lib->add_option("--grid-min", grid_min, "First wavelength in micrometres");
  gen_lib->add_option("--grid-max", grid_max, "Last wavelength in micrometres");
  gen_lib->add_option("--points", grid_points, "Number of uniform grid points");
  gen_lib->add_option("--profile", lib_profile,
                      "JSON list of gas definitions (name, line_centers_um, line_hwhm_um, "
                      "line_strengths, target_norm); default: built-in nine-gas profile");

  // gen-dataset
  auto* gen_ds = app.add_subcommand("gen-dataset", "Generate a Group I/II/III dataset");
  int group = 1;
  std::optional<double> snr_db, conc_low, conc_high, presence;
  std::size_t ds_n = 10000;
  std::uint64_t ds_seed = 0;
  std::string ds_library, ds_out;
  double ds_b = kDefaultPathLengthCm;
  gen_ds->add_option("--group", group, "Concentration preset: 1, 2 or 3")->required()->check(CLI::Range(1, 3));
  gen_ds->add_option("--snr-db", snr_db, "Source-noise SNR in dB (omit for noiseless data)");
  gen_ds->add_option("--n", ds_n, "Number of samples");
  gen_ds->add_option("--seed", ds_seed, "Random seed");
  gen_ds->add_option("--library", ds_library, "Gas library directory")->required();
  gen_ds->add_option("--out", ds_out, "Output dataset file")->required();
  gen_ds->add_option("--path-length", ds_b, "Path length b in cm");
  gen_ds->add_option("--low", conc_low, "Override the preset's lower concentration bound (M)");
  gen_ds->add_option("--high", conc_high, "Override the preset's upper concentration bound (M)");
  gen_ds->add_option("--presence", presence, "Override the preset's presence probability");

  // fit-pca
  auto* fit_pca_cmd = app.add_subcommand("fit-pca", "Fit a (functional) PCA basis to a dataset");
  std::string pca_dataset, pca_out, pca_flavor = "fpca";
  Eigen::Index pca_components = 20;
  bool pca_uncentered = false;
  fit_pca_cmd->add_option("--dataset", pca_dataset, "Dataset file")->required();
  fit_pca_cmd->add_option("--flavor", pca_flavor, "fpca or pca")->check(CLI::IsMember({"fpca", "pca"}));
  fit_pca_cmd->add_option("--components", pca_components, "Maximum number of components");
  fit_pca_cmd->add_flag("--uncentered", pca_uncentered, "Do not subtract the mean spectrum");
  fit_pca_cmd->add_option("--out", pca_out, "Output directory")->required();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Train a quantification model");
  std::string fit_model_kind, fit_dataset, fit_out;
  ModelOptions fit_opts;
  fit_cmd->add_option("--model", fit_model_kind, "lr, direct, tf, plsr or mean")
      ->required()
      ->check(CLI::IsMember({"lr", "direct", "tf", "plsr", "mean"}));
  fit_cmd->add_option("--dataset", fit_dataset, "Training (or TF calibration) dataset");
  fit_cmd->add_option("--out", fit_out, "Output model directory")->required();
  add_model_options(fit_cmd, fit_opts);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Predict concentrations with a saved model");
  std::string pred_model, pred_dataset, pred_out;
  predict_cmd->add_option("--model-dir", pred_model, "Model directory")->required();
  predict_cmd->add_option("--dataset", pred_dataset, "Dataset file")->required();
  predict_cmd->add_option("--out", pred_out, "Output CSV of predicted concentrations (M)")->required();

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "k-fold evaluation of one model");
  std::string eval_model, eval_dataset, eval_out;
  std::size_t eval_folds = 10;
  std::uint64_t eval_seed = 0;
  ModelOptions eval_opts;
  eval_cmd->add_option("--model", eval_model, "lr, direct, tf, plsr or mean")
      ->required()
      ->check(CLI::IsMember({"lr", "direct", "tf", "plsr", "mean"}));
  eval_cmd->add_option("--dataset", eval_dataset, "Dataset file")->required();
  eval_cmd->add_option("--folds", eval_folds, "Number of folds");
  eval_cmd->add_option("--seed", eval_seed, "Fold assignment seed");
  eval_cmd->add_option("--out", eval_out, "Output directory")->required();
  add_model_options(eval_cmd, eval_opts);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Parameter sweeps");
  sweep_cmd->require_subcommand(1);
  auto* sweep_pcs = sweep_cmd->add_subcommand("pcs", "LR RMSE vs. number of components");
  std::string sp_dataset, sp_out, sp_flavor = "fpca";
  Eigen::Index sp_min = 1, sp_max = 20;
  bool sp_uncentered = false;
  std::size_t sp_folds = 10;
  std::uint64_t sp_seed = 0;
  sweep_pcs->add_option("--dataset", sp_dataset, "Dataset file")->required();
  sweep_pcs->add_option("--min", sp_min, "Smallest component count");
  sweep_pcs->add_option("--max", sp_max, "Largest component count");
  sweep_pcs->add_option("--flavor", sp_flavor, "fpca or pca")->check(CLI::IsMember({"fpca", "pca"}));
  sweep_pcs->add_flag("--uncentered", sp_uncentered, "Do not subtract the mean spectrum");
  sweep_pcs->add_option("--folds", sp_folds, "Number of folds");
  sweep_pcs->add_option("--seed", sp_seed, "Fold assignment seed");
  sweep_pcs->add_option("--out", sp_out, "Output directory")->required();

  auto* sweep_snr_cmd = sweep_cmd->add_subcommand("snr", "Model RMSE across datasets of different SNR");
  std::vector<std::string> ss_datasets, ss_models{"lr", "tf", "plsr"};
  std::string ss_out;
  std::size_t ss_folds = 10;
  std::uint64_t ss_seed = 0;
  ModelOptions ss_opts;
  sweep_snr_cmd->add_option("--datasets", ss_datasets, "Dataset files, one per SNR")->required()->delimiter(',');
  sweep_snr_cmd->add_option("--models", ss_models, "Models to evaluate")->delimiter(',');
  sweep_snr_cmd->add_option("--folds", ss_folds, "Number of folds");
  sweep_snr_cmd->add_option("--seed", ss_seed, "Fold assignment seed");
  sweep_snr_cmd->add_option("--out", ss_out, "Output directory")->required();
  add_model_options(sweep_snr_cmd, ss_opts);

  auto* sweep_ts = sweep_cmd->add_subcommand("train-size", "Model RMSE vs. number of training samples");
  std::string st_dataset, st_out;
  std::vector<std::string> st_models{"lr", "tf", "plsr"};
  std::vector<std::size_t> st_sizes{10, 20, 50, 100, 200, 500, 1000};
  std::vector<std::uint64_t> st_seeds{0, 1, 2, 3, 4};
  double st_test_fraction = 0.1;
  ModelOptions st_opts;
  sweep_ts->add_option("--dataset", st_dataset, "Dataset file")->required();
  sweep_ts->add_option("--models", st_models, "Models to evaluate")->delimiter(',');
  sweep_ts->add_option("--sizes", st_sizes, "Ascending training sizes")->delimiter(',');
  sweep_ts->add_option("--seeds", st_seeds, "Split seeds")->delimiter(',');
  sweep_ts->add_option("--test-fraction", st_test_fraction, "Held-out fraction");
  sweep_ts->add_option("--out", st_out, "Output directory")->required();
  add_model_options(sweep_ts, st_opts);

  // out-of-range
  auto* oor_cmd = app.add_subcommand("out-of-range", "Train in range, test on a wider concentration range");
  std::string oor_train, oor_test, oor_out;
  std::vector<std::string> oor_models{"tf"}, oor_gases;
  std::size_t oor_bins = 22, oor_folds = 10;
  std::uint64_t oor_seed = 0;
  ModelOptions oor_opts;
  oor_cmd->add_option("--train", oor_train, "In-range training dataset (e.g. Group II)")->required();
  oor_cmd->add_option("--test", oor_test, "Wider-range test dataset (e.g. Group III)")->required();
  oor_cmd->add_option("--models", oor_models, "Models to evaluate")->delimiter(',');
  oor_cmd->add_option("--gases", oor_gases, "Gas names to study (default: all)")->delimiter(',');
  oor_cmd->add_option("--bins", oor_bins, "Log-spaced concentration bins");
  oor_cmd->add_option("--folds", oor_folds, "Number of folds over the training set");
  oor_cmd->add_option("--seed", oor_seed, "Fold assignment seed");
  oor_cmd->add_option("--out", oor_out, "Output directory")->required();
  add_model_options(oor_cmd, oor_opts);

  // noise-estimate
  auto* noise_cmd = app.add_subcommand("noise-estimate", "Estimate system noise and score-space noise");
  std::string ne_dataset, ne_model, ne_basis, ne_out;
  bool ne_spectra = false;
  ModelOptions ne_opts;
  noise_cmd->add_option("--dataset", ne_dataset, "Samples with known concentrations")->required();
  noise_cmd->add_option("--model-dir", ne_model, "Saved TF model (default: fit one from --library)");
  noise_cmd->add_option("--basis", ne_basis, "PCA basis directory for the overlap/noise regression");
  noise_cmd->add_flag("--write-spectra", ne_spectra, "Also write the per-sample noise spectra");
  noise_cmd->add_option("--out", ne_out, "Output directory")->required();
  add_model_options(noise_cmd, ne_opts);

  // export
  auto* export_cmd = app.add_subcommand("export", "Export plot data for variance, Lambda, overlap or flavor comparison");
  std::string ex_what, ex_dataset, ex_basis, ex_model, ex_library, ex_label = "data", ex_out;
  Eigen::Index ex_up_to = 20;
  export_cmd->add_option("--what", ex_what, "variance, lambda, overlap or flavors")
      ->required()
      ->check(CLI::IsMember({"variance", "lambda", "overlap", "flavors"}));
  export_cmd->add_option("--dataset", ex_dataset, "Dataset file (variance, flavors)");
  export_cmd->add_option("--basis", ex_basis, "Basis directory (variance; default: fit one)");
  export_cmd->add_option("--model-dir", ex_model, "LR model directory (lambda)");
  export_cmd->add_option("--library", ex_library, "Gas library directory (lambda, overlap)");
  export_cmd->add_option("--up-to", ex_up_to, "Number of components to report");
  export_cmd->add_option("--label", ex_label, "Label used in the variance table");
  export_cmd->add_option("--out", ex_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ERROR[config]: " << e.what() << '\n';
    return 1;
  }

  std::vector<const CLI::App*> chain;
  for (const CLI::App* a = &app; a != nullptr;) {
    const auto subs = a->get_subcommands();
    if (subs.empty()) break;
    a = subs.front();
    chain.push_back(a);
  }

  try {
    const int threads = resolve_thread_count(threads_flag);
    set_thread_count(threads);
    const auto config = resolved_config(app, chain, threads, argc, argv);

    if (gen_lib->parsed()) {
      auto grid = std::make_shared<const WavelengthGrid>(
          WavelengthGrid::uniform(grid_min, grid_max, grid_points));
      std::optional<GasLibrary> lib;
      if (lib_profile.empty()) {
        lib.emplace(synthesize_library(lib_seed, grid));
      } else {
        std::ifstream in(lib_profile, std::ios::binary);
        if (!in) throw Error(ErrorCode::kIo, "cannot open " + lib_profile);
        std::vector<GasDefinition> defs;
        try {
          for (const auto& j : nlohmann::json::parse(in)) {
            defs.push_back({j.at("name").get<std::string>(),
                            j.at("line_centers_um").get<std::vector<double>>(),
                            j.at("line_hwhm_um").get<std::vector<double>>(),
                            j.at("line_strengths").get<std::vector<double>>(),
                            j.at("target_norm").get<double>()});
          }
        } catch (const nlohmann::json::exception& e) {
          throw Error(ErrorCode::kSchema, lib_profile + ": " + e.what());
        }
        lib.emplace(build_library(grid, defs));
      }
      save_library(*lib, lib_out);
      write_json(fs::path(lib_out) / "config.json", config);
    } else if (gen_ds->parsed()) {
      const auto lib = load_library(ds_library);
      ConcentrationScheme scheme = group_scheme(group);
      if (conc_low) scheme.low = *conc_low;
      if (conc_high) scheme.high = *conc_high;
      if (presence) scheme.presence_prob = *presence;
      std::optional<NoiseSpec> noise;
      if (snr_db) noise = NoiseSpec::from_snr_db(*snr_db);
      const auto ds = generate_dataset(lib, scheme, ds_n, ds_b, noise, ds_seed);
      save_dataset(ds, ds_out);
      write_json(ds_out + ".config.json", config);
    } else if (fit_pca_cmd->parsed()) {
      const auto ds = load_dataset(pca_dataset);
      const auto basis = fit_pca(ds.absorbances, ds.grid, parse_flavor(pca_flavor), !pca_uncentered,
                                 pca_components);
      save_basis(basis, pca_out);
      plot_data_variance(basis, ds.absorbances, basis.size(), "training").write(pca_out);
      write_json(fs::path(pca_out) / "config.json", config);
    } else if (fit_cmd->parsed()) {
      const auto lib = maybe_library(fit_opts.library);
      const ModelSpec spec = build_spec(fit_model_kind, fit_opts, lib);
      QuantModel model;
      if (fit_dataset.empty()) {
        const auto* tf = std::get_if<TfSpec>(&spec);
        if (!tf || tf->options.b_mode == PathLengthMode::kLearn ||
            tf->options.noise_mode == NoiseMode::kLearn) {
          throw Error(ErrorCode::kConfiguration, "--dataset is required for this model");
        }
        model = fit_tf(*lib, tf->options);
      } else {
        const auto ds = read_dataset(fit_dataset, lib);
        model = *fit_model(spec, ds).model;
      }
      save_model(model, fit_out);
      write_json(fs::path(fit_out) / "config.json", config);
    } else if (predict_cmd->parsed()) {
      const auto model = load_model(pred_model);
      const auto ds = load_dataset(pred_dataset);
      write_predictions(pred_out, predict(model, ds.absorbances), ds.gas_names);
      write_json(pred_out + ".config.json", config);
    } else if (eval_cmd->parsed()) {
      const auto lib = maybe_library(eval_opts.library);
      const auto ds = read_dataset(eval_dataset, lib);
      const auto report = kfold_evaluate(build_spec(eval_model, eval_opts, lib), ds,
                                         {eval_folds, eval_seed});
      plot_data(report).write(eval_out);
      write_json(fs::path(eval_out) / "report.json", report_json(report));
      write_json(fs::path(eval_out) / "config.json", config);
      std::cout << report.model << ": mean RMSE " << report.mean_rmse * 1e6 << " uM\n";
    } else if (sweep_pcs->parsed()) {
      const auto ds = load_dataset(sp_dataset);
      PcSweepOptions o;
      o.min_components = sp_min;
      o.max_components = sp_max;
      o.flavor = parse_flavor(sp_flavor);
      o.centered = !sp_uncentered;
      o.kfold = {sp_folds, sp_seed};
      plot_data(sweep_pc_count(ds, o), sp_flavor + "-lr").write(sp_out);
      write_json(fs::path(sp_out) / "config.json", config);
    } else if (sweep_snr_cmd->parsed()) {
      const auto lib = maybe_library(ss_opts.library);
      std::vector<SpectraDataset> sets;
      for (const auto& p : ss_datasets) sets.push_back(read_dataset(p, lib));
      std::vector<const SpectraDataset*> ptrs;
      for (const auto& s : sets) ptrs.push_back(&s);
      plot_data(sweep_snr(ptrs, build_specs(ss_models, ss_opts, lib), {ss_folds, ss_seed})).write(ss_out);
      write_json(fs::path(ss_out) / "config.json", config);
    } else if (sweep_ts->parsed()) {
      const auto lib = maybe_library(st_opts.library);
      const auto ds = read_dataset(st_dataset, lib);
      TrainingSizeOptions o{st_sizes, st_test_fraction, st_seeds};
      plot_data(sweep_training_size(ds, build_specs(st_models, st_opts, lib), o)).write(st_out);
      write_json(fs::path(st_out) / "config.json", config);
    } else if (oor_cmd->parsed()) {
      const auto lib = maybe_library(oor_opts.library);
      const auto train = read_dataset(oor_train, lib);
      const auto test = read_dataset(oor_test, lib);
      OutOfRangeOptions o;
      o.bins = oor_bins;
      o.kfold = {oor_folds, oor_seed};
      for (const auto& name : oor_gases) {
        const auto it = std::find(train.gas_names.begin(), train.gas_names.end(), name);
        if (it == train.gas_names.end()) throw Error(ErrorCode::kConfiguration, "unknown gas '" + name + "'");
        o.gases.push_back(static_cast<std::size_t>(it - train.gas_names.begin()));
      }
      plot_data(out_of_range_study(train, test, build_specs(oor_models, oor_opts, lib), o)).write(oor_out);
      write_json(fs::path(oor_out) / "config.json", config);
    } else if (noise_cmd->parsed()) {
      const auto lib = maybe_library(ne_opts.library);
      const auto ds = read_dataset(ne_dataset, lib);
      TfModel tf;
      if (!ne_model.empty()) {
        const auto loaded = load_model(ne_model);
        if (!std::holds_alternative<TfModel>(loaded)) {
          throw Error(ErrorCode::kConfiguration, "--model-dir must hold a tf model");
        }
        tf = std::get<TfModel>(loaded);
      } else {
        if (!lib) throw Error(ErrorCode::kConfiguration, "need --model-dir or --library");
        const auto spec = std::get<TfSpec>(build_spec("tf", ne_opts, lib));
        const bool learn = spec.options.b_mode == PathLengthMode::kLearn ||
                           spec.options.noise_mode == NoiseMode::kLearn;
        tf = fit_tf(*lib, spec.options, learn ? &ds : nullptr);
      }
      const auto est = estimate_system_noise(tf, ds);
      nlohmann::json out{{"mean_power", est.mean_power}, {"samples", ds.size()},
                         {"path_length_cm", tf.path_length_cm}};
      if (!ne_basis.empty()) {
        const auto basis = load_basis(ne_basis);
        const auto ov = estimate_overlap_noise(basis, ds);
        fs::create_directories(ne_out);
        write_matrix_csv(fs::path(ne_out) / "b_psi_eps.csv", ov.b_psi_eps);
        out["expected_noise"] = to_std(ov.expected_noise);
        out["mean_projection"] = to_std(ov.mean_projection);
        out["overlap_residual_rms"] = ov.residual_rms;
        out["overlap_condition_number"] = ov.condition_number;
      }
      if (ne_spectra) {
        SpectraTable table{ds.grid, {}, {}};
        for (Eigen::Index i = 0; i < est.noise_spectra.rows(); ++i) {
          table.names.push_back("sample_" + std::to_string(i));
          table.spectra.emplace_back(ds.grid, est.noise_spectra.row(i).transpose());
        }
        fs::create_directories(ne_out);
        write_spectra_csv(fs::path(ne_out) / "noise_spectra.csv", table);
      }
      write_json(fs::path(ne_out) / "noise.json", out);
      write_json(fs::path(ne_out) / "config.json", config);
    } else if (export_cmd->parsed()) {
      PlotBundle bundle;
      if (ex_what == "variance") {
        if (ex_dataset.empty()) throw Error(ErrorCode::kConfiguration, "--dataset is required");
        const auto ds = load_dataset(ex_dataset);
        const PcBasis basis = ex_basis.empty()
                                  ? fit_pca(ds.absorbances, ds.grid, Flavor::kFunctional, true, ex_up_to)
                                  : load_basis(ex_basis);
        bundle = plot_data_variance(basis, ds.absorbances, std::min(ex_up_to, basis.size()), ex_label);
      } else if (ex_what == "lambda") {
        if (ex_model.empty() || ex_library.empty()) {
          throw Error(ErrorCode::kConfiguration, "--model-dir and --library are required");
        }
        const auto model = load_model(ex_model);
        if (!std::holds_alternative<LrModel>(model)) {
          throw Error(ErrorCode::kConfiguration, "--model-dir must hold an lr model");
        }
        bundle = plot_data_lambda(std::get<LrModel>(model), load_library(ex_library).norms());
      } else if (ex_what == "overlap") {
        if (ex_library.empty()) throw Error(ErrorCode::kConfiguration, "--library is required");
        const auto lib = load_library(ex_library);
        const Matrix ov = overlap_matrix(lib);
        PlotTable t{"overlap.csv", "library overlap <e_j|e_k>", "gas_a", "overlap",
                    {"gas_a", "gas_b", "overlap"}, {}};
        for (Eigen::Index a = 0; a < ov.rows(); ++a) {
          for (Eigen::Index b = 0; b < ov.cols(); ++b) {
            t.rows.push_back({lib.gas(a).name, lib.gas(b).name, ov(a, b)});
          }
        }
        bundle.tables.push_back(std::move(t));
      } else {
        if (ex_dataset.empty()) throw Error(ErrorCode::kConfiguration, "--dataset is required");
        const auto ds = load_dataset(ex_dataset);
        const auto fpca = fit_pca(ds.absorbances, ds.grid, Flavor::kFunctional, true, ex_up_to);
        const auto pca = fit_pca(ds.absorbances, ds.grid, Flavor::kPlain, true, ex_up_to);
        const Eigen::Index n = std::min(fpca.size(), pca.size());
        const auto agreement = compare_flavors(fpca, pca, n);
        PlotTable t{"flavors.csv", "functional vs. plain components", "component", "r_squared",
                    {"component", "rmse", "r_squared"}, {}};
        for (std::size_t l = 0; l < agreement.size(); ++l) {
          t.rows.push_back({static_cast<long long>(l + 1), agreement[l].rmse, agreement[l].r_squared});
        }
        bundle.tables.push_back(std::move(t));
      }
      bundle.write(ex_out);
      write_json(fs::path(ex_out) / "config.json", config);
    }
  } catch (const Error& e) {
    std::cerr << "ERROR[" << error_token(e.code()) << "]: " << e.what() << '\n';
    return is_numerical(e.code()) ? 2 : 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "ERROR[io]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ERROR[internal]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
