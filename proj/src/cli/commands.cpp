#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "maidkit/cli.hpp"

namespace maidkit::cli {

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

// Raised for problems that map to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json path_json(const NamedPath& named) {
  json steps = json::array();
  for (Step s : named.path.steps) steps.push_back(s == Step::Forward ? "forward" : "backward");
  return {{"name", named.name}, {"nodes", named.path.nodes}, {"steps", steps}};
}

json edges_json(const std::vector<Edge>& edges) {
  json out = json::array();
  for (const Edge& e : edges) out.push_back({e.from, e.to});
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

// Parses and validates; prints diagnostics and returns nullopt when invalid.
std::optional<Maid> load(const std::string& path, std::ostream& err) {
  Maid maid = parse(read_file(path));
  auto diags = validate(maid);
  if (diags.empty()) return maid;
  for (const auto& d : diags) {
    err << path << ": " << (d.node.empty() ? "<graph>" : d.node) << ": " << d.rule
        << ": " << d.message << "\n";
  }
  return std::nullopt;
}

std::string join_edges(const std::vector<Edge>& edges) {
  std::string out;
  for (const Edge& e : edges) {
    if (!out.empty()) out += ", ";
    out += e.from + "->" + e.to;
  }
  return out.empty() ? "(none)" : out;
}

std::string join_ids(const std::vector<NodeId>& ids) {
  std::string out;
  for (const NodeId& id : ids) {
    if (!out.empty()) out += ", ";
    out += id;
  }
  return out.empty() ? "(none)" : out;
}

std::string path_text(const Path& path) {
  std::string out = path.nodes.front();
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    out += path.steps[i] == Step::Forward ? " -> " : " <- ";
    out += path.nodes[i + 1];
  }
  return out;
}

std::string leaves_text(const BigCount& count) { return count.str(); }

}  // namespace

json leaf_count_json(const BigCount& count) {
  if (count <= std::numeric_limits<std::uint64_t>::max()) {
    return count.convert_to<std::uint64_t>();
  }
  return count.str();
}

json patterns_json(const PatternReport& report) {
  json out = json::array();
  for (const PatternInstance& inst : report.all()) {
    json bindings = {{"u", inst.u},
                     {"n", inst.n ? json(*inst.n) : json(nullptr)},
                     {"u_prime", inst.u_prime ? json(*inst.u_prime) : json(nullptr)}};
    if (inst.a) bindings["a"] = *inst.a;
    json paths = json::array();
    for (const auto& p : inst.witness_paths) paths.push_back(path_json(p));
    out.push_back({{"decision", inst.decision},
                   {"kind", std::string(to_string(inst.kind))},
                   {"bindings", bindings},
                   {"witness_paths", paths}});
  }
  return out;
}

json simplify_json(const SimplificationResult& result, bool with_trace) {
  json out = {{"eliminated", result.trace.eliminated()},
              {"removed_edges", edges_json(result.trace.removed_edges())},
              {"iterations", result.iterations_count},
              {"final", render(result.final)}};
  if (with_trace) {
    json trace = json::array();
    for (const auto& it : result.trace.iterations) {
      trace.push_back({{"eliminated", it.eliminated},
                       {"conversion_edges", edges_json(it.conversion_edges)},
                       {"pruned_edges", edges_json(it.pruned_edges)}});
    }
    out["trace"] = trace;
    json flags = json::object();
    for (const auto& [id, flag] : result.effectiveness) flags[id] = flag;
    out["effectiveness"] = flags;
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reasoning-pattern analysis and simplification of multi-agent "
               "influence diagrams",
               "maid"};
  app.require_subcommand(1);

  std::string file;
  bool json_out = false;

  auto* validate_cmd = app.add_subcommand("validate", "Check a diagram file");
  validate_cmd->add_option("file", file)->required();

  bool original = false;
  auto* patterns_cmd = app.add_subcommand("patterns", "List reasoning-pattern instances");
  patterns_cmd->add_option("file", file)->required();
  patterns_cmd->add_flag("--json", json_out);
  patterns_cmd->add_flag("--original", original,
                         "Analyse the input graph instead of the simplified one");

  std::string out_path;
  bool trace = false;
  auto* simplify_cmd = app.add_subcommand("simplify", "Simplify a diagram");
  simplify_cmd->add_option("file", file)->required();
  simplify_cmd->add_option("--out", out_path, "Write the simplified diagram here");
  simplify_cmd->add_flag("--trace", trace);
  simplify_cmd->add_flag("--json", json_out);

  double tol = 1e-9;
  std::uint64_t seed = 0;
  auto* verify_cmd =
      app.add_subcommand("verify", "Check that simplification preserves an equilibrium");
  verify_cmd->add_option("file", file)->required();
  verify_cmd->add_option("--tol", tol)->check(CLI::NonNegativeNumber);
  verify_cmd->add_option("--seed", seed);
  verify_cmd->add_flag("--json", json_out);

  std::string bench_name;
  int n = 1;
  auto* bench_cmd = app.add_subcommand("bench", "Leaf-count benchmark");
  bench_cmd->add_option("name", bench_name)->required()->check(CLI::IsMember({"card-game"}));
  bench_cmd->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--json", json_out);

  std::string fixture_name;
  auto* fixture_cmd = app.add_subcommand("fixture", "Print a built-in diagram");
  fixture_cmd->add_option("name", fixture_name)
      ->required()
      ->check(CLI::IsMember({"card-game", "principal-agent"}));
  fixture_cmd->add_option("--n", n)->check(CLI::PositiveNumber);
  fixture_cmd->add_option("--out", out_path);

  auto* dot_cmd = app.add_subcommand("export-dot", "Write Graphviz DOT");
  dot_cmd->add_option("file", file)->required();
  dot_cmd->add_option("--out", out_path);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (validate_cmd->parsed()) {
      if (!load(file, err)) return kFailure;
      out << file << ": valid\n";
      return kOk;
    }

    if (patterns_cmd->parsed()) {
      auto maid = load(file, err);
      if (!maid) return kFailure;
      EnumerateOptions options;
      options.original = original;
      PatternReport report = enumerate_patterns(*maid, options);
      if (json_out) {
        out << patterns_json(report).dump(2) << "\n";
        return kOk;
      }
      for (const auto& [decision, list] : report.by_decision) {
        out << decision << (report.flags.at(decision) ? "" : " (not effective)") << ":";
        out << (list.empty() ? " no patterns\n" : "\n");
        for (const auto& inst : list) {
          out << "  " << to_string(inst.kind) << " u=" << inst.u;
          if (inst.n) out << " n=" << *inst.n;
          if (inst.u_prime) out << " u'=" << *inst.u_prime;
          if (inst.a) out << " a=" << *inst.a;
          out << "\n";
          for (const auto& p : inst.witness_paths) {
            out << "    " << p.name << ": " << path_text(p.path) << "\n";
          }
        }
      }
      return kOk;
    }

    if (simplify_cmd->parsed()) {
      auto maid = load(file, err);
      if (!maid) return kFailure;
      SimplificationResult result = simplify(*maid);
      if (!out_path.empty()) write_file(out_path, render(result.final));
      if (json_out) {
        out << simplify_json(result, trace).dump(2) << "\n";
        return kOk;
      }
      out << "eliminated: " << join_ids(result.trace.eliminated()) << "\n";
      out << "removed edges: " << join_edges(result.trace.removed_edges()) << "\n";
      out << "iterations: " << result.iterations_count << "\n";
      if (trace) {
        for (std::size_t i = 0; i < result.trace.iterations.size(); ++i) {
          const auto& it = result.trace.iterations[i];
          out << "iteration " << i + 1 << ":\n";
          out << "  eliminated: " << join_ids(it.eliminated) << "\n";
          out << "  conversion edges: " << join_edges(it.conversion_edges) << "\n";
          out << "  pruned edges: " << join_edges(it.pruned_edges) << "\n";
        }
      }
      if (out_path.empty()) out << "\n" << render(result.final);
      return kOk;
    }

    if (verify_cmd->parsed()) {
      auto maid = load(file, err);
      if (!maid) return kFailure;
      if (!maid->fully_parameterized()) {
        err << file << ": verify needs every chance node to have a cpt and every "
                       "utility a table\n";
        return kFailure;
      }
      SimplificationResult result = simplify(*maid);
      VerificationReport report = verify_simplification(*maid, result, seed, tol);
      if (json_out) {
        json gaps = json::object();
        for (const auto& [agent, gap] : report.gaps) gaps[agent] = gap;
        out << json{{"status", std::string(to_string(report.status))},
                    {"tolerance", tol},
                    {"seed", seed},
                    {"eliminated", result.trace.eliminated()},
                    {"gaps", gaps}}
                   .dump(2)
            << "\n";
      } else {
        out << "status: " << to_string(report.status) << "\n";
        if (report.status == VerifyStatus::Inconclusive) {
          out << "no pure equilibrium of the simplified game exists\n";
        }
        for (const auto& [agent, gap] : report.gaps) {
          out << "gap " << agent << ": " << std::setprecision(17) << gap << "\n";
        }
      }
      return report.status == VerifyStatus::Fail ? kFailure : kOk;
    }

    if (bench_cmd->parsed()) {
      const auto start = std::chrono::steady_clock::now();
      Maid game = card_game(n);
      SimplificationResult result = simplify(game);
      LeafMetric before = leaf_metric(game);
      LeafMetric after = leaf_metric(result.final);
      const double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
      if (json_out) {
        json per = json::array();
        for (const auto& [id, leaves] : after.per_decision) {
          per.push_back({{"decision", id}, {"leaves", leaf_count_json(leaves)}});
        }
        out << json{{"n", n},
                    {"monolithic_leaves", leaf_count_json(before.monolithic)},
                    {"decoupled_total", leaf_count_json(after.decoupled_total)},
                    {"per_decision", per},
                    {"wall_time_ms", ms}}
                   .dump(2)
            << "\n";
      } else {
        out << "n: " << n << "\n";
        out << "monolithic leaves: " << leaves_text(before.monolithic) << "\n";
        out << "decoupled total: " << leaves_text(after.decoupled_total) << "\n";
        for (const auto& [id, leaves] : after.per_decision) {
          out << "  " << id << ": " << leaves_text(leaves) << "\n";
        }
        out << "wall time ms: " << ms << "\n";
      }
      return kOk;
    }

    if (fixture_cmd->parsed()) {
      const std::string text = render(fixture(fixture_name, n));
      if (out_path.empty()) {
        out << text;
      } else {
        write_file(out_path, text);
      }
      return kOk;
    }

    if (dot_cmd->parsed()) {
      auto maid = load(file, err);
      if (!maid) return kFailure;
      if (out_path.empty()) {
        out << to_dot(*maid);
      } else {
        write_file(out_path, to_dot(*maid));
      }
      return kOk;
    }
  } catch (const ParseError& e) {
    err << file << ":" << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const MaidError& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace maidkit::cli
