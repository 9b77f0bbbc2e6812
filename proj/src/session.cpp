#include "infodist/session.hpp"

#include <charconv>
#include <cstdlib>

#include "infodist/error.hpp"
#include "infodist/remote_model.hpp"

namespace infodist {

ModelSelector ModelSelector::parse(std::string_view text, std::string_view default_server) {
  ModelSelector s;
  if (text == "builtin:uniform") {
    s.kind = Kind::Uniform;
    return s;
  }
  if (text == "builtin:adaptive") return s;
  if (text.starts_with("builtin:adaptive:")) {
    const auto digits = text.substr(17);
    unsigned k = 0;
    auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc() || end != digits.data() + digits.size() || digits.empty()) {
      throw Error(Errc::InvalidArgument, "bad adaptive order in '" + std::string(text) + "'");
    }
    s.order = k;
    return s;
  }
  if (text == "remote" || text == "remote:" || text.starts_with("remote:")) {
    s.kind = Kind::Remote;
    s.url = text.size() > 7 ? std::string(text.substr(7)) : std::string(default_server);
    if (s.url.empty()) {
      throw Error(Errc::InvalidArgument, "remote model needs a URL or INFODIST_SERVER");
    }
    return s;
  }
  throw Error(Errc::InvalidArgument,
              "unknown model '" + std::string(text) +
                  "', expected builtin:uniform, builtin:adaptive:K or remote:URL");
}

std::string ModelSelector::to_string() const {
  switch (kind) {
    case Kind::Uniform: return "builtin:uniform";
    case Kind::Adaptive: return "builtin:adaptive:" + std::to_string(order);
    case Kind::Remote: return "remote:" + url;
  }
  return {};
}

std::shared_ptr<const EntropyModel> make_model(const ModelSelector& s) {
  switch (s.kind) {
    case ModelSelector::Kind::Uniform: return std::make_shared<UniformModel>();
    case ModelSelector::Kind::Adaptive: return std::make_shared<AdaptiveModel>(s.order);
    case ModelSelector::Kind::Remote: {
      ServerEndpoint ep;
      ep.base_url = s.url;
      return std::make_shared<RemoteModel>(ep);
    }
  }
  throw Error(Errc::InvalidArgument, "bad selector");
}

void SessionConfig::apply_environment() {
  if (const char* m = std::getenv("INFODIST_MODEL"); m && *m) model = m;
  if (const char* s = std::getenv("INFODIST_SERVER"); s && *s) server = s;
}

void SessionConfig::validate() const {
  (void)selector();
  if (chunk_chars == 0) throw Error(Errc::InvalidArgument, "chunk_chars must be positive");
  if (total_log2 && (*total_log2 < 14 || *total_log2 > kMaxTotalLog2)) {
    throw Error(Errc::InvalidArgument, "total_log2 must lie in [14, 22]");
  }
}

}  // namespace infodist
