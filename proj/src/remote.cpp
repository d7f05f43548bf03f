// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include "gcf/remote.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "gcf/error.hpp"

namespace gcf {

namespace {

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("write failed: ") +
                           std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

// Buffered line reader over a file descriptor with a poll() deadline.
class FdLineReader {
 public:
  std::string read_line(int fd, std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (auto nl = buf_.find('\n'); nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw TransportError("timed out waiting for reply");
      pollfd pfd{fd, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("poll failed: ") +
                             std::strerror(errno));
      }
      if (rc == 0) throw TransportError("timed out waiting for reply");
      char chunk[65536];
      const ssize_t n = ::read(fd, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("read failed: ") +
                             std::strerror(errno));
      }
      if (n == 0) throw TransportError("connection closed by peer");
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  std::string buf_;
};

class TcpChannel final : public LineChannel {
 public:
  TcpChannel(const std::string& host, const std::string& port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res)) {
      throw TransportError("cannot resolve " + host + ":" + port + ": " +
                           ::gai_strerror(rc));
    }
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
      fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd_ < 0) continue;
      if (::connect(fd_, ai->ai_addr, ai->ai_addrlen) == 0) break;
      ::close(fd_);
      fd_ = -1;
    }
    ::freeaddrinfo(res);
    if (fd_ < 0) {
      throw TransportError("cannot connect to " + host + ":" + port);
    }
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~TcpChannel() override {
    if (fd_ >= 0) ::close(fd_);
  }

  void send_line(const std::string& line) override {
    write_all(fd_, line + "\n");
  }
  std::string recv_line(std::chrono::milliseconds timeout) override {
    return reader_.read_line(fd_, timeout);
  }

 private:
  int fd_ = -1;
  FdLineReader reader_;
};

class ProcessChannel final : public LineChannel {
 public:
  explicit ProcessChannel(const std::string& command) {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
      throw TransportError("pipe failed");
    }
    pid_ = ::fork();
    if (pid_ < 0) throw TransportError("fork failed");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(),
              static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    // A dead child must surface as a TransportError, not SIGPIPE.
    ::signal(SIGPIPE, SIG_IGN);
  }
  ~ProcessChannel() override {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (pid_ > 0) {
      int status = 0;
      ::waitpid(pid_, &status, 0);
    }
  }

  void send_line(const std::string& line) override {
    write_all(write_fd_, line + "\n");
  }
  std::string recv_line(std::chrono::milliseconds timeout) override {
    return reader_.read_line(read_fd_, timeout);
  }

 private:
  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  FdLineReader reader_;
};

}  // namespace

std::unique_ptr<LineChannel> open_channel(const std::string& address) {
  if (address.rfind("exec:", 0) == 0) {
    return std::make_unique<ProcessChannel>(address.substr(5));
  }
  std::string hostport = address;
  if (hostport.rfind("tcp://", 0) == 0) hostport = hostport.substr(6);
  const auto colon = hostport.rfind(':');
  if (colon == std::string::npos || colon == 0 ||
      colon + 1 == hostport.size()) {
    throw ArgumentError("remote address must be tcp://host:port or "
                        "exec:<command>, got '" + address + "'");
  }
  return std::make_unique<TcpChannel>(hostport.substr(0, colon),
                                      hostport.substr(colon + 1));
}

RemoteProvider::RemoteProvider(std::string address, Options options)
    : address_(std::move(address)), options_(std::move(options)) {
  channel_ = open_channel(address_);
  const auto reply = call({{"op", "vocab"}});
  try {
    vocab_ = Vocabulary(reply.at("vocab").get<std::vector<std::string>>(),
                        reply.at("eos_id").get<TokenId>());
  } catch (const nlohmann::json::exception& e) {
    throw TransportError("bad vocab reply from " + address_ + ": " + e.what());
  }
}

std::shared_ptr<const RemoteProvider> RemoteProvider::connect(
    const std::string& address, Options options) {
  return std::make_shared<const RemoteProvider>(address, std::move(options));
}

std::shared_ptr<const RemoteProvider> RemoteProvider::with_config(
    const nlohmann::json& extra) const {
  Options opts = options_;
  opts.config.merge_patch(extra);
  return connect(address_, std::move(opts));
}

nlohmann::json RemoteProvider::exchange(const std::string& line) const {
  if (!channel_) channel_ = open_channel(address_);
  channel_->send_line(line);
  const std::string reply = channel_->recv_line(options_.timeout);
  try {
    return nlohmann::json::parse(reply);
  } catch (const nlohmann::json::exception& e) {
    throw TransportError("malformed reply from " + address_ + ": " + e.what());
  }
}

nlohmann::json RemoteProvider::call(nlohmann::json request) const {
  if (!options_.config.empty()) request["config"] = options_.config;
  const std::string line = request.dump();
  std::lock_guard lock(mu_);
  nlohmann::json reply;
  try {
    reply = exchange(line);
  } catch (const TransportError&) {
    channel_.reset();
    reply = exchange(line);
  }
  if (!reply.is_object() || !reply.value("ok", false)) {
    const std::string why = reply.is_object()
                                ? reply.value("error", std::string("unknown"))
                                : std::string("non-object reply");
    throw TransportError(address_ + ": " + why);
  }
  return reply;
}

LogitVector RemoteProvider::next_logits(std::span<const TokenId> prefix) const {
  vocab_.validate(prefix);
  const auto reply =
      call({{"op", "logits"},
            {"prefix", std::vector<TokenId>(prefix.begin(), prefix.end())}});
  auto scores = reply.at("logits").get<std::vector<double>>();
  if (scores.size() != vocab_.size()) {
    throw TransportError(address_ + ": logits width " +
                         std::to_string(scores.size()) + " != vocabulary " +
                         std::to_string(vocab_.size()));
  }
  return LogitVector(std::move(scores));
}

TokenSeq RemoteProvider::encode(const std::string& text) const {
  auto ids = call({{"op", "encode"}, {"text", text}}).at("ids").get<TokenSeq>();
  vocab_.validate(ids);
  return ids;
}

std::string RemoteProvider::decode(std::span<const TokenId> ids) const {
  return call({{"op", "decode"},
               {"ids", std::vector<TokenId>(ids.begin(), ids.end())}})
      .at("text")
      .get<std::string>();
}

std::string RemoteProvider::descriptor() const {
  std::string d = "remote:" + address_;
  if (!options_.config.empty()) d += " config=" + options_.config.dump();
  return d;
}

nlohmann::json handle_request(const LogitProvider& provider,
                              const nlohmann::json& request) {
  auto fail = [](const std::string& why) {
    return nlohmann::json{{"ok", false}, {"error", why}};
  };
  try {
    const auto& vocab = provider.vocabulary();
    const std::string op = request.at("op").get<std::string>();
    if (op == "vocab") {
      return {{"ok", true}, {"vocab", vocab.symbols()},
              {"eos_id", vocab.eos_id()}};
    }
    if (op == "logits") {
      const auto prefix = request.at("prefix").get<TokenSeq>();
      return {{"ok", true}, {"logits", provider.next_logits(prefix).scores}};
    }
    if (op == "encode") {
      std::istringstream words(request.at("text").get<std::string>());
      TokenSeq ids;
      for (std::string w; words >> w;) ids.push_back(vocab.id(w));
      return {{"ok", true}, {"ids", ids}};
    }
    if (op == "decode") {
      std::string text;
      for (TokenId id : request.at("ids").get<TokenSeq>()) {
        if (!text.empty()) text += ' ';
        text += vocab.symbol(id);
      }
      return {{"ok", true}, {"text", text}};
    }
    return fail("unknown op '" + op + "'");
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

void serve_stream(const LogitProvider& provider, std::istream& in,
                  std::ostream& out) {
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    nlohmann::json reply;
    try {
      reply = handle_request(provider, nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      reply = {{"ok", false}, {"error", std::string("malformed JSON: ") + e.what()}};
    }
    out << reply.dump() << '\n' << std::flush;
  }
}

TcpServer::TcpServer(ProviderPtr provider, int port)
    : provider_(std::move(provider)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError("socket failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) !=
          0 ||
      ::listen(listen_fd_, 16) != 0) {
    ::close(listen_fd_);
    throw TransportError(std::string("bind/listen failed: ") +
                         std::strerror(errno));
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  ::signal(SIGPIPE, SIG_IGN);
  acceptor_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() {
  stop();
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.join();
  ::close(listen_fd_);
}

void TcpServer::stop() {
  std::lock_guard lock(mu_);
  if (stopping_) return;
  stopping_ = true;
  ::shutdown(listen_fd_, SHUT_RDWR);
  for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
}

void TcpServer::wait() {
  if (acceptor_.joinable()) acceptor_.join();
}

void TcpServer::accept_loop() {
  for (;;) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      return;
    }
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] {
      FdLineReader reader;
      try {
        for (;;) {
          const std::string line =
              reader.read_line(fd, std::chrono::hours(24));
          nlohmann::json reply;
          try {
            reply = handle_request(*provider_, nlohmann::json::parse(line));
          } catch (const nlohmann::json::exception& e) {
            reply = {{"ok", false},
                     {"error", std::string("malformed JSON: ") + e.what()}};
          }
          write_all(fd, reply.dump() + "\n");
        }
      } catch (const TransportError&) {
      }
      {
        std::lock_guard lock(mu_);
        std::erase(client_fds_, fd);
      }
      ::close(fd);
    });
  }
}

}  // namespace gcf
