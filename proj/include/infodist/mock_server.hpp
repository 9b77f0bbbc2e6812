#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "infodist/entropy_model.hpp"

namespace httplib {
class Server;
}

namespace infodist {

/// In-process probability server speaking the remote wire protocol on top
/// of a local EntropyModel. Used by the tests and by `serve-mock`.
class MockServer {
 public:
  struct Options {
    std::shared_ptr<const EntropyModel> model;
    std::size_t context_window = 4096;
    bool distribution = true;
    /// The first `fail_first` requests get a 503.
    int fail_first = 0;
    /// Reported model id; defaults to the model's descriptor id.
    std::string model_id;
    std::string tokenizer = "bytes-v1";
  };

  explicit MockServer(Options options);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();
  /// Blocks until a started server stops.
  void wait();

  std::string base_url() const;
  std::uint64_t request_count() const noexcept { return requests_.load(); }
  void set_model_id(std::string id);

 private:
  void install_routes();
  std::string model_id() const;

  Options opts_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<int> failures_left_{0};
  mutable std::mutex id_mutex_;
};

}  // namespace infodist
