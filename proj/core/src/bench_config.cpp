#include <charconv>
#include <fstream>
#include <sstream>

#include "simopt/bench.hpp"

namespace simopt::bench {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <class T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  require(ec == std::errc{} && ptr == end, ErrorKind::configuration,
          "key '" + std::string(key) + "': expected an unsigned integer, got '" +
              std::string(value) + "'");
  return out;
}

std::size_t parse_count(std::string_view key, std::string_view value) {
  return parse_integer<std::size_t>(key, value);
}

double parse_real(std::string_view key, std::string_view value) {
  const std::string copy(value);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(copy, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == copy.size() && used > 0, ErrorKind::configuration,
          "key '" + std::string(key) + "': expected a number, got '" + copy + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(ErrorKind::configuration,
              "key '" + std::string(key) + "': expected a boolean, got '" + std::string(value) + "'");
}

}  // namespace

std::vector<std::size_t> BenchConfig::effective_sizes() const {
  if (!sizes.empty()) return sizes;
  switch (task) {
    case TaskKind::meanvar: return {500};
    case TaskKind::newsvendor: return {1000};
    case TaskKind::classification: return {50};
  }
  return {};
}

void BenchConfig::validate() const {
  require(repetitions >= 1, ErrorKind::configuration, "reps must be >= 1");
  require(!backends.empty(), ErrorKind::configuration, "backend list is empty");
  require(chunk_size >= 1, ErrorKind::configuration, "backend.chunk_size must be >= 1");
  for (std::size_t s : effective_sizes()) require(s >= 1, ErrorKind::configuration, "sizes must be >= 1");
  if (task == TaskKind::classification) {
    for (std::size_t s : effective_sizes()) {
      require(s >= 2, ErrorKind::configuration, "classification needs at least 2 features");
      sqn.validate(30 * s);
    }
  } else {
    fw.validate(task == TaskKind::meanvar ? 2 : 1);
    if (task == TaskKind::meanvar)
      for (std::size_t s : effective_sizes())
        require(s >= 2, ErrorKind::configuration, "portfolio needs at least 2 assets");
  }
}

void apply_setting(BenchConfig& config, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "task") {
    config.task = parse_task_kind(value);
  } else if (key == "sizes") {
    config.sizes.clear();
    for (auto item : split_list(value)) config.sizes.push_back(parse_count(key, item));
    require(!config.sizes.empty(), ErrorKind::configuration, "sizes must be nonempty");
  } else if (key == "backends" || key == "backend") {
    config.backends.clear();
    for (auto item : split_list(value)) config.backends.push_back(parse_backend_variant(item));
    require(!config.backends.empty(), ErrorKind::configuration, "backend list is empty");
  } else if (key == "backend.chunk_size") {
    config.chunk_size = parse_count(key, value);
  } else if (key == "backend.workers") {
    config.workers = parse_count(key, value);
  } else if (key == "reps") {
    config.repetitions = parse_count(key, value);
  } else if (key == "seed") {
    config.seed = parse_integer<std::uint64_t>(key, value);
  } else if (key == "out") {
    config.out = std::string(value);
  } else if (key == "parallel_reps") {
    config.parallel_reps = parse_bool(key, value);
  } else if (key == "fw.epochs") {
    config.fw.epochs = parse_count(key, value);
  } else if (key == "fw.inner_iters" || key == "fw.resample_every") {
    config.fw.inner_iters = parse_count(key, value);
  } else if (key == "fw.iterations") {
    const std::size_t total = parse_count(key, value);
    require(config.fw.inner_iters >= 1 && total % config.fw.inner_iters == 0,
            ErrorKind::configuration,
            "fw.iterations must be a multiple of fw.inner_iters (" +
                std::to_string(config.fw.inner_iters) + ")");
    config.fw.epochs = total / config.fw.inner_iters;
  } else if (key == "fw.sample_size") {
    config.fw.sample_size = parse_count(key, value);
  } else if (key == "fw.schedule") {
    config.fw.schedule = parse_sample_schedule(value);
  } else if (key == "sqn.iterations") {
    config.sqn.iterations = parse_count(key, value);
  } else if (key == "sqn.L") {
    config.sqn.pair_interval = parse_count(key, value);
  } else if (key == "sqn.memory") {
    config.sqn.memory = parse_count(key, value);
  } else if (key == "sqn.beta") {
    config.sqn.beta = parse_real(key, value);
  } else if (key == "sqn.b") {
    config.sqn.batch = parse_count(key, value);
  } else if (key == "sqn.b_H") {
    config.sqn.hessian_batch = parse_count(key, value);
  } else {
    throw Error(ErrorKind::configuration, "unknown config key '" + std::string(key) + "'");
  }
}

BenchConfig parse_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    require(eq != std::string_view::npos, ErrorKind::configuration,
            "line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    require(!key.empty(), ErrorKind::configuration, "line " + std::to_string(line_no) + ": empty key");
    for (const auto& [k, v] : entries)
      require(k != key, ErrorKind::configuration, "duplicate key '" + std::string(key) + "'");
    entries.emplace_back(key, value);
  }

  // The total FW iteration count depends on inner_iters, so it is applied last
  // and cross-checked against an explicit epoch count.
  BenchConfig config;
  std::optional<std::string> total;
  bool explicit_epochs = false;
  for (const auto& [k, v] : entries) {
    if (k == "fw.iterations") {
      total = v;
      continue;
    }
    explicit_epochs |= k == "fw.epochs";
    apply_setting(config, k, v);
  }
  if (total) {
    const std::size_t epochs = config.fw.epochs;
    apply_setting(config, "fw.iterations", *total);
    require(!explicit_epochs || epochs == config.fw.epochs, ErrorKind::configuration,
            "fw.iterations disagrees with fw.epochs * fw.inner_iters");
  }
  config.validate();
  return config;
}

BenchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string render_config(const BenchConfig& config) {
  std::ostringstream out;
  out << "task = " << to_string(config.task) << '\n';
  out << "sizes = ";
  const auto sizes = config.effective_sizes();
  for (std::size_t i = 0; i < sizes.size(); ++i) out << (i ? "," : "") << sizes[i];
  out << "\nbackends = ";
  for (std::size_t i = 0; i < config.backends.size(); ++i)
    out << (i ? "," : "") << to_string(config.backends[i]);
  out << "\nbackend.chunk_size = " << config.chunk_size;
  out << "\nbackend.workers = " << config.workers;
  out << "\nreps = " << config.repetitions;
  out << "\nseed = " << config.seed;
  out << "\nparallel_reps = " << (config.parallel_reps ? "true" : "false");
  out << "\nfw.epochs = " << config.fw.epochs;
  out << "\nfw.inner_iters = " << config.fw.inner_iters;
  out << "\nfw.sample_size = " << config.fw.sample_size;
  out << "\nfw.schedule = " << to_string(config.fw.schedule);
  out << "\nsqn.iterations = " << config.sqn.iterations;
  out << "\nsqn.L = " << config.sqn.pair_interval;
  out << "\nsqn.memory = " << config.sqn.memory;
  out << "\nsqn.beta = " << format_double(config.sqn.beta);
  out << "\nsqn.b = " << config.sqn.batch;
  out << "\nsqn.b_H = " << config.sqn.hessian_batch;
  out << "\nout = " << config.out.string() << '\n';
  return out.str();
}

}  // namespace simopt::bench
