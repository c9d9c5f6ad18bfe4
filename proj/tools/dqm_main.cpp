#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dqm/error.hpp"
#include "dqm/harness.hpp"
#include "dqm/io.hpp"
#include "dqm/registry.hpp"
#include "dqm/report.hpp"
#include "dqm/selection.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace dqm;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataLoad = 2;

struct DataLoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool verbose = false;

void note(const std::string& msg) {
  if (verbose) std::cerr << "dqm: " << msg << "\n";
}

LoadedDataset load(const std::string& path, bool with_signals = true) {
  try {
    auto desc = DatasetDescriptor::load(path);
    if (!with_signals) desc.signals.reset();
    auto loaded = load_dataset(desc);
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    note("loaded '" + path + "': " + std::to_string(loaded.dataset.n_records()) + " records, " +
         std::to_string(loaded.dataset.n_columns()) + " columns");
    return loaded;
  } catch (const std::exception& e) {
    throw DataLoadError(e.what());
  }
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text_file(out, text);
    note("wrote " + out);
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

// Reads one line; false on end of input.
bool prompt(const std::string& text, std::string& line) {
  std::cout << text << std::flush;
  return static_cast<bool>(std::getline(std::cin, line));
}

UseCaseProfile interactive_profile() {
  UseCaseProfile profile;
  std::cout << "Quality dimensions:";
  for (auto d : kDimensions) std::cout << " " << d;
  std::cout << "\n";
  std::string line;
  for (;;) {
    if (!prompt("Relevant dimensions (comma separated, empty for all): ", line))
      throw Error(ErrorKind::invalid_argument, "input ended");
    auto dims = split_list(line);
    auto unknown = std::find_if(dims.begin(), dims.end(), [](const std::string& d) {
      return std::find(std::begin(kDimensions), std::end(kDimensions), d) == std::end(kDimensions);
    });
    if (unknown == dims.end()) {
      profile.dimensions = dims;
      break;
    }
    std::cout << "unknown dimension '" << *unknown << "'\n";
  }

  for (;;) {
    auto sel = select_all(profile, TraverseMode::partial);
    const DimensionSelection* open = nullptr;
    for (const auto& d : sel.dimensions)
      if (d.relevant && !d.unanswered.empty()) {
        open = &d;
        break;
      }
    if (!open) return profile;
    const auto& q = open->unanswered.front();
    std::cout << "\n[" << open->dimension << "] " << q.text << "\n";
    for (std::size_t i = 0; i < q.options.size(); ++i) std::cout << "  " << i + 1 << ") " << q.options[i] << "\n";
    for (;;) {
      if (!prompt("answer (number or label, several separated by commas): ", line))
        throw Error(ErrorKind::invalid_argument, "input ended before all questions were answered");
      std::vector<std::string> picked;
      bool ok = !split_list(line).empty();
      for (const auto& tok : split_list(line)) {
        auto it = std::find(q.options.begin(), q.options.end(), tok);
        if (it != q.options.end()) {
          picked.push_back(*it);
          continue;
        }
        std::size_t n = 0;
        if (tok.find_first_not_of("0123456789") == std::string::npos && (n = std::stoul(tok)) >= 1 &&
            n <= q.options.size()) {
          picked.push_back(q.options[n - 1]);
          continue;
        }
        ok = false;
      }
      if (ok) {
        profile.answers[open->dimension + "." + q.question] = picked;
        break;
      }
      std::cout << "not one of the listed options, try again\n";
    }
  }
}

void print_selection(const SelectionResult& sel) {
  for (const auto& d : sel.dimensions) {
    if (!d.relevant) continue;
    std::cout << d.dimension << ":";
    for (const auto& m : d.metrics) std::cout << " " << m.metric_id;
    if (d.metrics.empty()) std::cout << " (" << (d.reason.empty() ? "none" : d.reason) << ")";
    for (const auto& u : d.unanswered) std::cout << " [unanswered: " << u.text << "]";
    std::cout << "\n";
  }
  std::cout << sel.entries().size() << " metric entries selected\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data quality metric library, selection and reporting"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Random seed for sampling-based metrics");
  app.add_flag("--verbose,-v", verbose, "Progress messages on stderr");

  // cards
  auto* cards = app.add_subcommand("cards", "Browse and export metric cards");
  cards->require_subcommand(1);
  CardFilter cf;
  auto* list = cards->add_subcommand("list", "List metric cards");
  list->add_option("--dimension", cf.dimension);
  list->add_option("--group", cf.group);
  list->add_option("--modality", cf.modality);
  list->add_option("--variable-type", cf.variable_type);
  std::string card_id, card_format = "md", card_out;
  auto* show = cards->add_subcommand("show", "Print one metric card");
  show->add_option("id", card_id, "Metric id")->required();
  show->add_option("--format", card_format, "md or json");
  auto* exp = cards->add_subcommand("export", "Write one file per card");
  exp->add_option("--format", card_format, "md or json");
  exp->add_option("--out", card_out, "Output directory")->required();

  // select
  auto* sel_cmd = app.add_subcommand("select", "Select metrics by walking the decision trees");
  std::string profile_path, sel_out;
  bool interactive = false, strict = false;
  auto* prof_opt = sel_cmd->add_option("--profile", profile_path, "Use-case profile JSON")->check(CLI::ExistingFile);
  auto* inter_flag = sel_cmd->add_flag("--interactive", interactive, "Ask the tree questions on the terminal");
  prof_opt->excludes(inter_flag);
  sel_cmd->add_flag("--strict", strict, "Fail on the first unanswered question");
  sel_cmd->add_option("--out", sel_out, "Selection JSON (stdout when omitted)");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Compute the selected metrics on a dataset");
  std::string data_path, selection_path, params_path, report_out, markdown_out;
  std::vector<std::string> extras;
  eval_cmd->add_option("--data", data_path, "Dataset descriptor JSON")->required();
  eval_cmd->add_option("--selection", selection_path, "Selection JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--params", params_path, "Metric parameter JSON")->check(CLI::ExistingFile);
  eval_cmd->add_option("--extra", extras, "Additional metric ids outside the selection");
  eval_cmd->add_option("--out", report_out, "Report JSON")->required();
  eval_cmd->add_option("--markdown", markdown_out, "Report Markdown");

  // subset
  auto* sub_cmd = app.add_subcommand("subset", "Build a stratified subset descriptor");
  std::string recipe_text, sub_out;
  sub_cmd->add_option("--data", data_path, "Dataset descriptor JSON")->required();
  sub_cmd->add_option("--recipe", recipe_text, "kind[:key=value,...]")->required();
  sub_cmd->add_option("--out", sub_out, "Output directory")->required();

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Compare metrics between two datasets");
  std::vector<std::string> data_pair;
  std::string metrics_text, cmp_out;
  cmp_cmd->add_option("--data", data_pair, "Dataset descriptors A and B")->required()->expected(2);
  cmp_cmd->add_option("--metrics", metrics_text, "Comma separated metric ids")->required();
  cmp_cmd->add_option("--params", params_path, "Metric parameter JSON")->check(CLI::ExistingFile);
  cmp_cmd->add_option("--out", cmp_out, "Comparison JSON (stdout when omitted)");

  // ptbxl-harness
  auto* ptb_cmd = app.add_subcommand("ptbxl-harness", "Run the PTB-XL case study on a local copy");
  HarnessOptions hopt;
  std::string ptb_out, signals_dir;
  std::size_t entropy_records = 0, signal_records = 1000;
  ptb_cmd->add_option("--root", hopt.root, "Directory with ptbxl_database.csv")->required();
  ptb_cmd->add_option("--signals", signals_dir, "Directory of converted f32le records");
  ptb_cmd->add_flag("--low-rate", hopt.low_rate, "Use the 100 Hz records");
  ptb_cmd->add_option("--entropy-records", entropy_records, "Limit sample entropy to N records (0: all)");
  ptb_cmd->add_option("--signal-records", signal_records, "Records loaded for signal metrics (0: all)");
  ptb_cmd->add_option("--out", ptb_out, "Output directory for reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*cards) {
      if (*list) {
        for (const auto* c : filter(cf)) std::cout << c->id << "\t" << c->name << "\t" << c->group << "\n";
      } else if (*show) {
        std::cout << render_card(card_id, parse_card_format(card_format));
      } else {
        auto fmt = parse_card_format(card_format);
        std::string ext = fmt == CardFormat::json ? ".json" : ".md";
        for (const auto& c : all_cards()) write_text_file(fs::path(card_out) / (c.id + ext), render_card(c, fmt));
        std::cout << all_cards().size() << " cards written to " << card_out << "\n";
      }
      return kOk;
    }

    if (*sel_cmd) {
      if (profile_path.empty() && !interactive) {
        std::cerr << "select: pass --profile FILE or --interactive\n";
        return kUsage;
      }
      UseCaseProfile profile =
          interactive ? interactive_profile() : UseCaseProfile::from_json(read_json_file(profile_path));
      auto sel = select_all(profile, strict ? TraverseMode::strict : TraverseMode::partial);
      auto doc = rationale_document(sel, json::object(), utc_timestamp());
      if (!sel_out.empty()) {
        emit(sel_out, doc.dump(2) + "\n");
        print_selection(sel);
      } else {
        emit("", doc.dump(2) + "\n");
      }
      return kOk;
    }

    if (*eval_cmd) {
      auto sel = SelectionResult::from_json(read_json_file(selection_path));
      json params = params_path.empty() ? json::object() : read_json_file(params_path);
      auto loaded = load(data_path);
      auto report = run_report(loaded.dataset, sel, params, seed, extras);
      emit(report_out, report.to_json().dump(2) + "\n");
      if (!markdown_out.empty()) emit(markdown_out, render_markdown(report));
      std::size_t failed = std::count_if(report.results.begin(), report.results.end(),
                                         [](const ReportEntry& e) { return e.error.has_value(); });
      std::cout << report.results.size() << " results, " << failed << " failed\n";
      return kOk;
    }

    if (*sub_cmd) {
      auto recipe = SubsetRecipe::parse(recipe_text);
      DatasetDescriptor desc;
      try {
        desc = DatasetDescriptor::load(data_path);
      } catch (const std::exception& e) {
        throw DataLoadError(e.what());
      }
      auto loaded = load(data_path, false);
      auto rows = subset_rows(loaded.dataset, recipe);
      if (desc.rows)
        for (auto& r : rows) r = (*desc.rows)[r];
      std::ostringstream idx;
      for (auto r : rows) idx << r << "\n";
      fs::path dir(sub_out);
      write_text_file(dir / "rows.txt", idx.str());
      desc.dataset_id += "-" + recipe.to_json().at("kind").get<std::string>();
      desc.rows.reset();
      auto j = desc.to_json();
      j["rows"] = "rows.txt";
      j["subset"] = recipe.to_json();
      j["subset"]["source"] = fs::absolute(data_path).lexically_normal().string();
      write_text_file(dir / "dataset.json", j.dump(2) + "\n");
      std::cout << rows.size() << " records written to " << (dir / "dataset.json").string() << "\n";
      return kOk;
    }

    if (*cmp_cmd) {
      json params = params_path.empty() ? json::object() : read_json_file(params_path);
      auto a = load(data_pair[0]);
      auto b = load(data_pair[1]);
      auto out = compare_datasets(a.dataset, b.dataset, split_list(metrics_text), params, seed);
      emit(cmp_out, out.dump(2) + "\n");
      return kOk;
    }

    if (*ptb_cmd) {
      if (!signals_dir.empty()) hopt.signals_dir = signals_dir;
      if (entropy_records > 0) hopt.entropy_records = entropy_records;
      hopt.signal_records = signal_records > 0 ? std::optional<std::size_t>(signal_records) : std::nullopt;
      hopt.seed = seed;
      HarnessOutcome outcome;
      try {
        outcome = ptbxl_harness(hopt);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::io || e.kind() == ErrorKind::parse) throw DataLoadError(e.what());
        throw;
      }
      std::cout << outcome.markdown();
      if (!ptb_out.empty() && !outcome.skipped) {
        for (std::size_t i = 0; i < outcome.reports.size(); ++i) {
          std::string stem = i == 0 ? "original" : "subset" + std::to_string(i);
          emit((fs::path(ptb_out) / (stem + ".json")).string(), outcome.reports[i].to_json().dump(2) + "\n");
        }
        emit((fs::path(ptb_out) / "table.md").string(), outcome.markdown());
      }
      return kOk;
    }
  } catch (const DataLoadError& e) {
    std::cerr << "error: cannot load data: " << e.what() << "\n";
    return kDataLoad;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::insufficient_data ? kDataLoad : kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
