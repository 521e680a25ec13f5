#include "discordq/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <condition_variable>
#include <map>
#include <set>
#include <thread>

#include "discordq/errors.hpp"
#include "discordq/pipeline.hpp"

namespace discordq {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<Story> load_story_catalog(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("not a story directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Story> out;
  std::set<std::string> ids;
  for (const auto& f : files) {
    auto s = load_story_bundle(f);
    if (!ids.insert(s.id).second) throw InputError("duplicate story id " + s.id + " in " + dir.string());
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const Story& a, const Story& b) { return a.id < b.id; });
  return out;
}

namespace {

ApiResponse error_response(int status, const std::string& message) {
  return {status, {{"error", message}}};
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  auto end = path.find('?');
  for (char c : path.substr(0, end)) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

}  // namespace

struct AnalysisService::Impl {
  std::shared_ptr<AnalysisStore> store;
  std::map<std::string, Story> catalog;
  Providers providers;
  RunConfig config;
  std::string fingerprint;

  std::mutex jobs_mutex;
  std::condition_variable jobs_cv;
  std::set<std::string> running;
  std::map<std::string, std::string> failures;
  std::vector<std::jthread> workers;

  httplib::Server server;
  std::jthread listener;

  StoryAnalysis load_for_serving(const std::string& id) const {
    if (store->contains(id, fingerprint)) return store->load(id, fingerprint);
    return store->load(id);
  }

  ApiResponse list_stories() const {
    std::map<std::string, json> rows;
    for (const auto& [id, s] : catalog)
      rows[id] = {{"id", id}, {"title", s.title}, {"n_sources", s.sources.size()},
                  {"analyzed", store->contains(id)}};
    for (const auto& id : store->story_ids()) {
      if (rows.contains(id)) continue;
      try {
        auto a = store->load(id);
        rows[id] = {{"id", id}, {"title", a.title}, {"n_sources", a.sources.size()}, {"analyzed", true}};
      } catch (const CorruptRecord& e) {
        spdlog::warn("skipping {}: {}", id, e.what());
      }
    }
    json list = json::array();
    for (auto& [_, r] : rows) list.push_back(std::move(r));
    return {200, {{"stories", list}}};
  }

  ApiResponse get_analysis(const std::string& id) const {
    if (!is_safe_story_id(id)) return error_response(404, "unknown story " + id);
    try {
      return {200, render_public_analysis(load_for_serving(id))};
    } catch (const NotFound&) {
      if (catalog.contains(id)) return error_response(404, "story " + id + " has not been analyzed");
      return error_response(404, "unknown story " + id);
    } catch (const CorruptRecord& e) {
      return error_response(500, e.what());
    }
  }

  ApiResponse analyze(const std::string& id) {
    auto it = catalog.find(id);
    if (it == catalog.end()) return error_response(404, "unknown story " + id);
    json body = {{"story_id", id}, {"config_fingerprint", fingerprint}};
    if (store->contains(id, fingerprint)) {
      body["status"] = "analyzed";
      return {200, body};
    }
    std::lock_guard lock(jobs_mutex);
    if (running.contains(id)) {
      body["status"] = "running";
      return {202, body};
    }
    running.insert(id);
    failures.erase(id);
    workers.emplace_back([this, &story = it->second] { run_job(story); });
    body["status"] = "accepted";
    return {202, body};
  }

  void run_job(const Story& story) {
    std::optional<std::string> failure;
    try {
      store->store(analyze_story(story, providers, config));
    } catch (const std::exception& e) {
      failure = e.what();
      spdlog::error("analysis of {} failed: {}", story.id, e.what());
    }
    std::lock_guard lock(jobs_mutex);
    running.erase(story.id);
    if (failure) failures[story.id] = *failure;
    jobs_cv.notify_all();
  }

  ApiResponse handle(const std::string& method, const std::string& path) {
    auto parts = split_path(path);
    if (method == "GET" && parts == std::vector<std::string>{"healthz"}) return {200, {{"status", "ok"}}};
    if (method == "GET" && parts == std::vector<std::string>{"stories"}) return list_stories();
    if (parts.size() == 3 && parts[0] == "stories") {
      if (parts[2] == "analysis") {
        if (method != "GET") return error_response(405, "method not allowed");
        return get_analysis(parts[1]);
      }
      if (parts[2] == "analyze") {
        if (method != "POST") return error_response(405, "method not allowed");
        return analyze(parts[1]);
      }
    }
    return error_response(404, "no route for " + method + " " + path);
  }

  void install_routes() {
    auto bridge = [this](const httplib::Request& req, httplib::Response& res) {
      ApiResponse r;
      try {
        r = handle(req.method, req.path);
      } catch (const std::exception& e) {
        r = error_response(500, e.what());
      }
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server.Get(R"(/.*)", bridge);
    server.Post(R"(/.*)", bridge);
  }
};

AnalysisService::AnalysisService(std::shared_ptr<AnalysisStore> store, std::vector<Story> catalog,
                                 Providers providers, RunConfig config)
    : impl_(std::make_unique<Impl>()) {
  impl_->store = std::move(store);
  for (auto& s : catalog) {
    providers.register_story(s);
    impl_->catalog.emplace(s.id, std::move(s));
  }
  impl_->fingerprint = config_fingerprint(config, providers);
  impl_->providers = std::move(providers);
  impl_->config = std::move(config);
  impl_->install_routes();
}

AnalysisService::~AnalysisService() {
  stop();
  wait_idle();
}

ApiResponse AnalysisService::handle(const std::string& method, const std::string& path) {
  return impl_->handle(method, path);
}

int AnalysisService::start(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  impl_->listener = std::jthread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void AnalysisService::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

void AnalysisService::stop() {
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
}

void AnalysisService::wait_idle() {
  std::unique_lock lock(impl_->jobs_mutex);
  impl_->jobs_cv.wait(lock, [&] { return impl_->running.empty(); });
}

const std::string& AnalysisService::fingerprint() const { return impl_->fingerprint; }

}  // namespace discordq
