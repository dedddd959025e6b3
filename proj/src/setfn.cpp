#include "spex/setfn.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>

#include "spex/errors.hpp"
#include "spex/rng.hpp"

extern char** environ;

namespace spex {

MaskDataset::MaskDataset(std::size_t n, std::vector<Sample> samples) : n_(n) {
  samples_.reserve(samples.size());
  for (auto& s : samples) push_back(std::move(s));
}

void MaskDataset::push_back(Sample s) {
  if (s.mask.width() != n_)
    throw InvalidArgument("mask width " + std::to_string(s.mask.width()) +
                          " does not match dataset n=" + std::to_string(n_));
  samples_.push_back(std::move(s));
}

std::vector<double> MaskDataset::values() const {
  std::vector<double> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.value);
  return out;
}

std::vector<Mask> MaskDataset::masks() const {
  std::vector<Mask> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.mask);
  return out;
}

MaskDataset MaskDataset::subset(std::span<const std::size_t> rows) const {
  MaskDataset out(n_);
  out.samples_.reserve(rows.size());
  for (auto r : rows) out.samples_.push_back(samples_.at(r));
  return out;
}

void ValueFunction::check_widths(std::span<const Mask> masks) const {
  for (const auto& m : masks)
    if (m.width() != n())
      throw InvalidArgument("mask width " + std::to_string(m.width()) +
                            " does not match value function n=" + std::to_string(n()));
}

TableValueFunction::TableValueFunction(std::size_t n,
                                       std::unordered_map<Mask, double, MaskHash> table)
    : n_(n), table_(std::move(table)) {
  for (const auto& [m, v] : table_)
    if (m.width() != n_) throw InvalidArgument("table key width does not match n");
}

TableValueFunction TableValueFunction::from_dense(std::size_t n, std::span<const double> values) {
  if (n > 30) throw CapacityError("dense table needs n <= 30");
  if (values.size() != (std::size_t{1} << n))
    throw InvalidArgument("dense table must have 2^n entries");
  std::unordered_map<Mask, double, MaskHash> table;
  table.reserve(values.size());
  for (std::uint64_t code = 0; code < values.size(); ++code)
    table.emplace(Mask::from_word(n, code), values[code]);
  return TableValueFunction(n, std::move(table));
}

std::vector<double> TableValueFunction::query(std::span<const Mask> masks) const {
  check_widths(masks);
  std::vector<double> out;
  out.reserve(masks.size());
  for (const auto& m : masks) {
    auto it = table_.find(m);
    if (it == table_.end()) throw ProviderError("table has no entry for subset " + m.to_string());
    out.push_back(it->second);
  }
  return out;
}

std::vector<double> CallbackValueFunction::query(std::span<const Mask> masks) const {
  check_widths(masks);
  std::vector<double> out;
  out.reserve(masks.size());
  for (const auto& m : masks) out.push_back(fn_(m));
  return out;
}

// ---------------------------------------------------------------------------
// External subprocess provider

ExternalValueFunction::ExternalValueFunction(std::size_t n, std::vector<std::string> argv)
    : n_(n), argv_(std::move(argv)) {
  if (argv_.empty()) throw ConfigError("external provider needs a command");
  if (::access(argv_[0].c_str(), X_OK) != 0)
    throw ProviderError("external command not executable: " + argv_[0]);
  spawn();
}

ExternalValueFunction::~ExternalValueFunction() { shutdown(); }

void ExternalValueFunction::spawn() {
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0)
    throw ProviderError(std::string("pipe failed: ") + std::strerror(errno));

  // Child writes into a closed pipe would otherwise kill us on the next batch.
  ::signal(SIGPIPE, SIG_IGN);

  std::vector<std::string> env_storage;
  for (char** e = environ; e && *e; ++e)
    if (std::strncmp(*e, "SPEX_VF_N=", 10) != 0) env_storage.emplace_back(*e);
  env_storage.push_back("SPEX_VF_N=" + std::to_string(n_));
  std::vector<char*> envp;
  for (auto& s : env_storage) envp.push_back(s.data());
  envp.push_back(nullptr);
  std::vector<char*> args;
  for (auto& a : argv_) args.push_back(a.data());
  args.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw ProviderError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execve(args[0], args.data(), envp.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

void ExternalValueFunction::shutdown() noexcept {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    // Give a well-behaved child the chance to exit on EOF first.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      ::usleep(2000);
    }
    ::kill(pid_, SIGTERM);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

namespace {

double parse_reply_line(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
    line.remove_suffix(1);
  while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
  double v = 0.0;
  const auto* first = line.data();
  const auto* last = line.data() + line.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (line.empty() || ec != std::errc{} || ptr != last)
    throw ProviderError("external provider replied with a non-numeric line: '" +
                        std::string(line) + "'");
  return v;
}

}  // namespace

std::vector<double> ExternalValueFunction::query(std::span<const Mask> masks) const {
  check_widths(masks);
  std::lock_guard lock(mu_);
  if (to_child_ < 0) throw ProviderError("external provider is not running");

  std::string request;
  request.reserve(masks.size() * (n_ + 1) + 1);
  for (const auto& m : masks) {
    request += m.to_bitstring();
    request += '\n';
  }
  request += '\n';

  std::vector<double> out;
  out.reserve(masks.size());
  std::size_t written = 0;
  auto drain_lines = [&] {
    std::size_t pos;
    while (out.size() < masks.size() && (pos = pending_.find('\n')) != std::string::npos) {
      out.push_back(parse_reply_line(std::string_view(pending_).substr(0, pos)));
      pending_.erase(0, pos + 1);
    }
  };
  drain_lines();

  // Interleave writing and reading so large batches cannot deadlock on full pipes.
  while (out.size() < masks.size()) {
    pollfd fds[2];
    nfds_t nfds = 0;
    fds[nfds++] = {from_child_, POLLIN, 0};
    const bool writing = written < request.size();
    if (writing) fds[nfds++] = {to_child_, POLLOUT, 0};
    if (::poll(fds, nfds, 30000) <= 0)
      throw ProviderError("external provider timed out or poll failed");
    if (writing && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const auto w = ::write(to_child_, request.data() + written, request.size() - written);
      if (w < 0) throw ProviderError("external provider closed its input");
      written += static_cast<std::size_t>(w);
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[4096];
      const auto r = ::read(from_child_, buf, sizeof buf);
      if (r <= 0)
        throw ProviderError("external provider exited after " + std::to_string(out.size()) +
                            " of " + std::to_string(masks.size()) + " values");
      pending_.append(buf, static_cast<std::size_t>(r));
      drain_lines();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Mask> sample_masks(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("sample_masks: n must be >= 1");
  if (count == 0) throw InvalidArgument("sample_masks: count must be >= 1");
  Rng rng(seed);
  std::vector<Mask> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    Mask m(n);
    auto words = m.words();
    for (std::size_t w = 0; w < words.size(); ++w) words[w] = rng.next();
    if (n % 64 != 0) words.back() &= (std::uint64_t{1} << (n % 64)) - 1;
    out.push_back(std::move(m));
  }
  return out;
}

MaskDataset evaluate_dataset(const ValueFunction& vf, std::span<const Mask> masks,
                             std::size_t batch_size) {
  if (batch_size == 0) throw InvalidArgument("batch size must be >= 1");
  for (const auto& m : masks)
    if (m.width() != vf.n())
      throw InvalidArgument("mask width " + std::to_string(m.width()) +
                            " does not match value function n=" + std::to_string(vf.n()));
  MaskDataset out(vf.n());
  for (std::size_t start = 0, batch = 0; start < masks.size(); start += batch_size, ++batch) {
    const auto len = std::min(batch_size, masks.size() - start);
    auto chunk = masks.subspan(start, len);
    std::vector<double> values;
    try {
      values = vf.query(chunk);
    } catch (const ProviderError& e) {
      throw ProviderError(std::string(e.what()) + " (batch " + std::to_string(batch) + ")", batch);
    }
    if (values.size() != len)
      throw ProviderError("provider returned " + std::to_string(values.size()) + " values for " +
                              std::to_string(len) + " masks (batch " + std::to_string(batch) + ")",
                          batch);
    for (std::size_t i = 0; i < len; ++i) out.push_back({chunk[i], values[i]});
  }
  return out;
}

}  // namespace spex
