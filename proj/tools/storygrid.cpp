// storygrid: replay token logs, report usage statistics, validate posters and
// run the session server.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "storygrid/core.hpp"
#include "storygrid/devlog.hpp"
#include "storygrid/error.hpp"
#include "storygrid/persist.hpp"

#ifdef STORYGRID_WITH_SERVICE
#include "storygrid/service/server.hpp"
#endif

namespace {

using namespace storygrid;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct ReplayArgs {
  std::string poster;
  std::string log;
  std::uint64_t seed = 0;
  double dead_spot_prob = 0.0;
  double break_gap = devlog::kDefaultBreakGapSeconds;
  std::string out;
  std::string stats;
  std::string transcript;
  bool json = false;
};

devlog::ReplayResult run_replay(const ReplayArgs& args) {
  const auto manifest = persist::parse_manifest(read_file(args.poster));
  const auto log = devlog::parse_log(read_file(args.log));
  return devlog::replay(manifest, log, {args.seed, args.dead_spot_prob, args.break_gap});
}

int cmd_replay(const ReplayArgs& args) {
  const auto result = run_replay(args);
  if (!args.out.empty()) {
    write_file(args.out, persist::serialize_layout(persist::save_layout(result.board, "final")));
  }
  if (!args.stats.empty()) write_file(args.stats, devlog::serialize_summary(result.summary));
  if (!args.transcript.empty()) {
    write_file(args.transcript, devlog::transcript_to_json(result.transcript).dump(2) + "\n");
  }
  std::cout << devlog::format_summary(result.summary);
  std::cout << "placements dropped: " << result.dropped << "\n";
  std::cout << "signals: " << result.transcript.size() << "\n";
  return 0;
}

int cmd_stats(const ReplayArgs& args) {
  const auto result = run_replay(args);
  if (args.json) {
    std::cout << devlog::serialize_summary(result.summary);
  } else {
    std::cout << devlog::format_summary(result.summary);
  }
  return 0;
}

int cmd_validate(const std::string& poster, const std::string& log) {
  const auto manifest = persist::parse_manifest(read_file(poster));
  const Board board = persist::load_poster(manifest);
  const auto problems = validate(board);
  for (const auto& p : problems) std::cerr << "invalid board: " << p << "\n";
  if (!problems.empty()) return 1;
  std::cout << "poster " << manifest.poster_id << ": " << manifest.objects.size() << " objects, "
            << board.objects.size() << " on board\n";
  if (!log.empty()) {
    const auto records = devlog::parse_log(read_file(log));
    std::cout << "log: " << records.size() << " records\n";
  }
  return 0;
}

#ifdef STORYGRID_WITH_SERVICE
int cmd_serve(const std::string& address, unsigned short port, const std::string& data_dir,
              const std::vector<std::string>& posters) {
  std::optional<std::filesystem::path> dir;
  if (!data_dir.empty()) dir = data_dir;
  service::SessionManager manager(dir);
  for (const auto& p : posters) std::cout << "loaded poster " << manager.add_poster(read_file(p)) << "\n";
  service::Server server(manager, address, port);
  std::cout << "listening on " << address << ":" << server.port() << std::endl;
  server.run_until_signal();
  return 0;
}
#endif

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"StoryGrid tangible poster engine"};
  app.require_subcommand(1);

  ReplayArgs replay_args;
  auto* replay = app.add_subcommand("replay", "Replay a token log against a poster");
  replay->add_option("--poster", replay_args.poster, "Poster manifest (poster.json)")->required();
  replay->add_option("--log", replay_args.log, "Token log (JSON lines)")->required();
  replay->add_option("--seed", replay_args.seed, "Dead-spot generator seed");
  replay->add_option("--dead-spot-prob", replay_args.dead_spot_prob, "Placement drop probability")
      ->check(CLI::Range(0.0, 1.0));
  replay->add_option("--break-gap", replay_args.break_gap, "Gap (s) counted as a break")
      ->check(CLI::PositiveNumber);
  replay->add_option("--out", replay_args.out, "Write the final layout snapshot here");
  replay->add_option("--stats", replay_args.stats, "Write usage statistics JSON here");
  replay->add_option("--transcript", replay_args.transcript, "Write the signal transcript here");

  ReplayArgs stats_args;
  auto* stats = app.add_subcommand("stats", "Usage statistics of completed token operations");
  stats->add_option("--log", stats_args.log, "Token log (JSON lines)")->required();
  stats->add_option("--poster", stats_args.poster, "Poster the log was recorded on")->required();
  stats->add_option("--break-gap", stats_args.break_gap, "Gap (s) counted as a break")
      ->check(CLI::PositiveNumber);
  stats->add_flag("--json", stats_args.json, "Print stats.json instead of a table");

  std::string validate_poster;
  std::string validate_log;
  auto* validate_cmd = app.add_subcommand("validate", "Check a poster manifest (and optionally a log)");
  validate_cmd->add_option("--poster", validate_poster, "Poster manifest")->required();
  validate_cmd->add_option("--log", validate_log, "Token log to check as well");

#ifdef STORYGRID_WITH_SERVICE
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  std::string data_dir;
  std::vector<std::string> posters;
  auto* serve = app.add_subcommand("serve", "Run the session server");
  serve->add_option("--address", address, "Bind address");
  serve->add_option("--port", port, "TCP port (0 picks one)");
  serve->add_option("--data-dir", data_dir, "Directory for posters and saved layouts");
  serve->add_option("--poster", posters, "Poster manifest to preload (repeatable)");
#endif

  CLI11_PARSE(app, argc, argv);

  try {
    if (*replay) return cmd_replay(replay_args);
    if (*stats) return cmd_stats(stats_args);
    if (*validate_cmd) return cmd_validate(validate_poster, validate_log);
#ifdef STORYGRID_WITH_SERVICE
    if (*serve) return cmd_serve(address, port, data_dir, posters);
#endif
  } catch (const storygrid::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
