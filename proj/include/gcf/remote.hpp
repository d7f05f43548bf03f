// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <chrono>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "gcf/provider.hpp"

namespace gcf {

// Remote logit protocol: newline-delimited JSON, one request per line and
// one response per line, in order.
//
//   {"op":"vocab"}                  -> {"ok":true,"vocab":[..],"eos_id":n}
//   {"op":"logits","prefix":[ids]}  -> {"ok":true,"logits":[..]}
//   {"op":"encode","text":".."}     -> {"ok":true,"ids":[..]}
//   {"op":"decode","ids":[..]}      -> {"ok":true,"text":".."}
//   failure                         -> {"ok":false,"error":".."}
//
// Requests may carry a "config" object (remote_config interventions); a
// server that does not understand it must ignore it or fail the request.

/// Bidirectional line transport.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void send_line(const std::string& line) = 0;
  /// Throws TransportError on timeout or end of stream.
  virtual std::string recv_line(std::chrono::milliseconds timeout) = 0;
};

/// Opens a channel for `address`:
///   "tcp://host:port" or "host:port"  TCP connection
///   "exec:<shell command>"            child process speaking on stdin/stdout
std::unique_ptr<LineChannel> open_channel(const std::string& address);

/// LogitProvider backed by a remote logit service. Requests on one provider
/// are serialized; a failed exchange is retried once on a fresh connection.
class RemoteProvider final : public LogitProvider {
 public:
  struct Options {
    std::chrono::milliseconds timeout{30000};
    nlohmann::json config = nlohmann::json::object();
  };

  static std::shared_ptr<const RemoteProvider> connect(
      const std::string& address, Options options);
  static std::shared_ptr<const RemoteProvider> connect(
      const std::string& address) {
    return connect(address, Options{});
  }

  const Vocabulary& vocabulary() const override { return vocab_; }
  LogitVector next_logits(std::span<const TokenId> prefix) const override;
  std::string descriptor() const override;

  TokenSeq encode(const std::string& text) const;
  std::string decode(std::span<const TokenId> ids) const;

  const nlohmann::json& config() const { return options_.config; }

  /// Same service with `extra` merged into the forwarded config; opens a
  /// new connection.
  std::shared_ptr<const RemoteProvider> with_config(
      const nlohmann::json& extra) const;

  RemoteProvider(std::string address, Options options);

 private:
  nlohmann::json call(nlohmann::json request) const;
  nlohmann::json exchange(const std::string& line) const;

  std::string address_;
  Options options_;
  Vocabulary vocab_;
  mutable std::mutex mu_;
  mutable std::unique_ptr<LineChannel> channel_;
};

/// Answers one protocol request against a local provider. Never throws;
/// failures become {"ok":false,...}. encode/decode split and join on
/// single spaces over the vocabulary's symbols.
nlohmann::json handle_request(const LogitProvider& provider,
                              const nlohmann::json& request);

/// Serves requests line by line until end of input.
void serve_stream(const LogitProvider& provider, std::istream& in,
                  std::ostream& out);

/// Minimal TCP server for the protocol, one thread per connection.
class TcpServer {
 public:
  /// Binds 127.0.0.1:`port`; port 0 picks a free port.
  TcpServer(ProviderPtr provider, int port = 0);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  int port() const { return port_; }
  std::string address() const {
    return "tcp://127.0.0.1:" + std::to_string(port_);
  }
  /// Blocks until stop() is called from another thread.
  void wait();
  void stop();

 private:
  void accept_loop();

  ProviderPtr provider_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<std::thread> workers_;
  std::vector<int> client_fds_;
  bool stopping_ = false;
};

}  // namespace gcf
