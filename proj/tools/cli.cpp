#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "infodist/codelen.hpp"
#include "infodist/container.hpp"
#include "infodist/distance.hpp"
#include "infodist/error.hpp"
#include "infodist/mock_server.hpp"
#include "infodist/session.hpp"
#include "infodist/tasks.hpp"

namespace infodist {

using nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw Error(Errc::IoError, "cannot write '" + path + "'");
  }
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Flag values as given; unset ones fall back to the environment/defaults.
struct Flags {
  std::string model, variant, metric, mode, separator;
  std::size_t chunk_chars = 0;
  unsigned total_log2 = 0;
  std::uint64_t seed = 0;
  unsigned jobs = 0;
  bool pretty = false;
};

struct Session {
  SessionConfig config;
  std::shared_ptr<const EntropyModel> model;
  Tokens separator;
  bool pretty = false;

  JointOptions joint() const { return {config.mode, config.variant, separator, true}; }
  EvalOptions eval() const {
    EvalOptions o;
    o.metric = config.metric;
    o.variant = config.variant;
    o.mode = config.mode;
    o.separator = separator;
    o.jobs = config.jobs;
    return o;
  }
};

SessionConfig resolve(const CLI::App& app, const Flags& f) {
  SessionConfig c;
  c.apply_environment();
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--model")) c.model = f.model;
  if (given("--variant")) c.variant = parse_variant(f.variant);
  if (given("--metric")) c.metric = parse_metric(f.metric);
  if (given("--mode")) c.mode = parse_joint_mode(f.mode);
  if (given("--chunk-chars")) c.chunk_chars = f.chunk_chars;
  if (given("--total-log2")) c.total_log2 = f.total_log2;
  if (given("--separator")) c.separator = f.separator;
  if (given("--seed")) c.seed = f.seed;
  if (given("--jobs")) c.jobs = f.jobs;
  c.validate();
  return c;
}

Session open_session(const CLI::App& app, const Flags& f) {
  Session s;
  s.config = resolve(app, f);
  s.pretty = f.pretty;
  s.model = make_model(s.config.selector());
  if (!s.config.separator.empty()) s.separator = s.model->tokenize(s.config.separator);
  return s;
}

void emit(std::ostream& out, const ordered_json& j, bool pretty) {
  out << (pretty ? j.dump(2) : j.dump()) << '\n';
}

ordered_json config_json(const Session& s) {
  return {{"model", s.model->descriptor().model_id},
          {"variant", to_string(s.config.variant)},
          {"metric", to_string(s.config.metric)},
          {"mode", to_string(s.config.mode)},
          {"separator", s.config.separator},
          {"seed", s.config.seed}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compression-based information distance toolkit", "infodist"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--model", f.model,
                 "builtin:uniform | builtin:adaptive:K | remote:URL (env INFODIST_MODEL)");
  app.add_option("--variant", f.variant, "logprob | logrank");
  app.add_option("--metric", f.metric, "max | min | mean");
  app.add_option("--mode", f.mode, "conditional | concatenation");
  app.add_option("--chunk-chars", f.chunk_chars, "characters per compressed chunk");
  app.add_option("--total-log2", f.total_log2, "coder precision, 14..22");
  app.add_option("--separator", f.separator, "text placed between the two operands");
  app.add_option("--seed", f.seed, "recorded in reports; builtin models are deterministic");
  app.add_option("--jobs", f.jobs, "worker threads, 0 = all cores");
  app.add_flag("--pretty", f.pretty, "indented JSON and tables");

  std::string in_path, out_path, x_path, y_path;
  auto* compress_cmd = app.add_subcommand("compress", "compress a file to .idz");
  compress_cmd->add_option("input", in_path)->required();
  compress_cmd->add_option("output", out_path)->required();

  auto* decompress_cmd = app.add_subcommand("decompress", "restore a .idz archive");
  decompress_cmd->add_option("input", in_path)->required();
  decompress_cmd->add_option("output", out_path)->required();

  auto* codelen_cmd = app.add_subcommand("codelen", "code length of x, or all lengths of x, y");
  codelen_cmd->add_option("x", x_path)->required();
  codelen_cmd->add_option("y", y_path);

  auto* distance_cmd = app.add_subcommand("distance", "distance report for two files");
  distance_cmd->add_option("x", x_path)->required();
  distance_cmd->add_option("y", y_path)->required();

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a task dataset");
  eval_cmd->require_subcommand(1);
  bool grid = false, rpred = false, swap_xy = false, multi = false, all_qrels = false;
  std::string shot = "one";
  std::size_t groups = 10, k = 10;
  eval_cmd->add_flag("--grid", grid, "also evaluate all six metric/variant cells");
  std::string sts_path, records_path, exemplars_path, queries_path, candidates_path, qrels_path;
  auto* sts_cmd = eval_cmd->add_subcommand("sts", "Spearman correlation on sentence pairs");
  sts_cmd->add_option("data", sts_path)->required();
  auto* cls_cmd = eval_cmd->add_subcommand("classify", "nearest-exemplar classification");
  cls_cmd->add_option("records", records_path)->required();
  cls_cmd->add_option("exemplars", exemplars_path)->required();
  cls_cmd->add_option("--shot", shot, "zero | one");
  cls_cmd->add_flag("--swap-xy", swap_xy, "use the text as x and the exemplar as y");
  cls_cmd->add_flag("--multi-exemplar", multi, "min distance over all exemplars of a class");
  cls_cmd->add_flag("--rpred", rpred, "bucket records by prediction distance ratio");
  cls_cmd->add_option("--groups", groups, "R_pred bucket count");
  auto* rr_cmd = eval_cmd->add_subcommand("rerank", "NDCG@k of distance-sorted candidates");
  rr_cmd->add_option("queries", queries_path)->required();
  rr_cmd->add_option("candidates", candidates_path)->required();
  rr_cmd->add_option("qrels", qrels_path)->required();
  rr_cmd->add_option("--k", k, "NDCG cutoff");
  rr_cmd->add_flag("--ideal-all-qrels", all_qrels, "ideal ranking from every judged doc");

  std::string host = "127.0.0.1", model_id;
  int port = 8080, fail_first = 0;
  std::size_t window = 4096;
  bool no_distribution = false;
  auto* serve_cmd = app.add_subcommand("serve-mock", "serve a builtin model over HTTP");
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port, "0 picks a free port");
  serve_cmd->add_option("--context-window", window);
  serve_cmd->add_option("--model-id", model_id, "model id to report");
  serve_cmd->add_option("--fail-first", fail_first, "answer the first N requests with 503");
  serve_cmd->add_flag("--no-distribution", no_distribution, "answer /distribution with 501");

  for (auto* sub : {compress_cmd, decompress_cmd, codelen_cmd, distance_cmd, eval_cmd, sts_cmd,
                    cls_cmd, rr_cmd, serve_cmd}) {
    sub->fallthrough();
  }

  std::vector<const char*> argv{"infodist"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    Session s = open_session(app, f);
    const auto t0 = Clock::now();

    if (*compress_cmd) {
      const std::string text = read_file(in_path);
      CompressOptions opts{s.config.chunk_chars, s.config.total_log2, s.config.jobs};
      CompressStats stats;
      const auto bytes = compress(*s.model, text, opts, &stats);
      write_file(out_path, {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
      emit(out,
           {{"bytes_in", stats.bytes_in},
            {"bits_out", stats.bits_out},
            {"ratio", stats.ratio()},
            {"chunks", stats.chunks},
            {"wall_ms", ms_since(t0)}},
           s.pretty);
    } else if (*decompress_cmd) {
      const std::string raw = read_file(in_path);
      const std::span<const std::uint8_t> bytes(
          reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size());
      const std::string text = decompress(*s.model, bytes, s.config.jobs);
      write_file(out_path, text);
      emit(out,
           {{"bytes_in", raw.size()},
            {"bytes_out", text.size()},
            {"chunks", unpack(bytes).header.chunk_count},
            {"wall_ms", ms_since(t0)}},
           s.pretty);
    } else if (*codelen_cmd && y_path.empty()) {
      const Tokens x = s.model->tokenize(read_file(x_path));
      auto report = codelen(*s.model, x, {}, s.config.variant).to_json();
      report["model"] = s.model->descriptor().model_id;
      emit(out, report, s.pretty);
    } else if (*codelen_cmd || *distance_cmd) {
      DistanceOptions opts{s.config.metric, s.joint()};
      auto report = distance(*s.model, read_file(x_path), read_file(y_path), opts).to_json();
      report["model"] = s.model->descriptor().model_id;
      emit(out, report, s.pretty);
    } else if (*eval_cmd) {
      EvalOptions o = s.eval();
      o.shot = parse_shot(shot);
      o.swap_xy = swap_xy;
      o.multi_exemplar_min = multi;
      o.k = k;
      o.ideal_from_all_qrels = all_qrels;
      ordered_json report{{"config", config_json(s)}};
      std::optional<MetricGrid> g;
      if (*sts_cmd) {
        const auto records = load_sts(read_file(sts_path));
        report["result"] = eval_sts(*s.model, records, o).to_json(records);
        if (grid) g = metric_grid(*s.model, records, o);
      } else if (*cls_cmd) {
        const auto data = load_classify(read_file(records_path), read_file(exemplars_path));
        report["config"]["shot"] = to_string(o.shot);
        report["config"]["swap_xy"] = o.swap_xy;
        report["result"] = eval_classify(*s.model, data, o).to_json(data);
        if (grid) g = metric_grid(*s.model, data, o);
        if (rpred) report["rpred"] = rpred_analysis(*s.model, data, o, groups).to_json();
      } else {
        const auto records = load_rerank(read_file(queries_path), read_file(candidates_path),
                                         read_file(qrels_path));
        report["config"]["k"] = o.k;
        report["result"] = eval_rerank(*s.model, records, o).to_json(records);
        if (grid) g = metric_grid(*s.model, records, o);
      }
      if (g) report["grid"] = g->to_json()["grid"];
      emit(out, report, s.pretty);
      if (g && s.pretty) out << g->to_table();
    } else if (*serve_cmd) {
      MockServer::Options mo;
      mo.model = s.model;
      mo.context_window = window;
      mo.distribution = !no_distribution;
      mo.fail_first = fail_first;
      mo.model_id = model_id;
      MockServer server(mo);
      server.start(host, port);
      emit(out, {{"listening", server.base_url()}}, false);
      out.flush();
      server.wait();
    }
    return 0;
  } catch (const Error& e) {
    emit(out, {{"error", {{"code", errc_name(e.code())}, {"message", e.what()}}}}, false);
    return 1;
  } catch (const std::exception& e) {
    emit(out, {{"error", {{"code", "Internal"}, {"message", e.what()}}}}, false);
    return 1;
  }
}

}  // namespace infodist
