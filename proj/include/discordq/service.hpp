#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "discordq/config.hpp"
#include "discordq/corpus.hpp"
#include "discordq/store.hpp"

namespace discordq {

/// Every *.json bundle directly under `dir`, sorted by story id. Throws
/// InputError on duplicate ids.
std::vector<Story> load_story_catalog(const std::filesystem::path& dir);

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// HTTP front of the store. Stories known to the catalog can be analyzed on
// demand with the configured providers; one analysis per story id runs at
// a time.
class AnalysisService {
 public:
  AnalysisService(std::shared_ptr<AnalysisStore> store, std::vector<Story> catalog,
                  Providers providers, RunConfig config);
  ~AnalysisService();
  AnalysisService(const AnalysisService&) = delete;
  AnalysisService& operator=(const AnalysisService&) = delete;

  /// Routes one request. Paths: GET /stories, GET /stories/{id}/analysis,
  /// POST /stories/{id}/analyze, GET /healthz.
  ApiResponse handle(const std::string& method, const std::string& path);

  /// Background HTTP listener; port 0 picks a free port, which is returned.
  int start(const std::string& host, int port);
  /// Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();
  /// Blocks until no on-demand analysis is running.
  void wait_idle();

  const std::string& fingerprint() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace discordq
