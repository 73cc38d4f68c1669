#include "ebd/harness/run_record.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ebd/error.hpp"

namespace ebd::harness {

using ordered_json = nlohmann::ordered_json;

std::string_view method_name(Method m) {
  switch (m) {
    case Method::direct:
      return "direct";
    case Method::best_of_n:
      return "best_of_n";
    case Method::ebd:
      return "ebd";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "direct") return Method::direct;
  if (name == "best_of_n") return Method::best_of_n;
  if (name == "ebd") return Method::ebd;
  throw InputDomainError("unknown method '" + std::string(name) + "'");
}

std::vector<PromptRecord> parse_prompts(std::string_view jsonl) {
  std::vector<PromptRecord> prompts;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto doc = nlohmann::json::parse(line);
      PromptRecord p;
      const auto& id = doc.at("id");
      p.id = id.is_string() ? id.get<std::string>() : id.dump();
      const auto& prompt = doc.at("prompt");
      if (prompt.is_array()) {
        p.tokens = prompt.get<TokenSeq>();
        p.text = render_tokens(*p.tokens);
      } else {
        p.text = prompt.get<std::string>();
      }
      if (doc.contains("reference") && !doc["reference"].is_null()) {
        const auto& ref = doc["reference"];
        p.reference = ref.is_string() ? ref.get<std::string>() : ref.dump();
      }
      prompts.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw InputDomainError("prompt file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return prompts;
}

std::vector<PromptRecord> load_prompts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputDomainError("cannot open prompt file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_prompts(text.str());
}

std::string RunRecord::output_text() const {
  if (const auto* t = std::get_if<TokenSeq>(&output)) return render_tokens(*t);
  if (const auto* s = std::get_if<std::string>(&output)) return *s;
  return {};
}

namespace {

template <class T>
ordered_json opt(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

template <class T>
std::optional<T> read_opt(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
  return doc[key].get<T>();
}

}  // namespace

std::string to_jsonl(const RunRecord& r) {
  ordered_json j;
  j["id"] = r.prompt_id;
  j["method"] = r.method;
  j["config_tag"] = r.config_tag;
  if (const auto* t = std::get_if<TokenSeq>(&r.output)) {
    j["output"] = *t;
  } else if (const auto* s = std::get_if<std::string>(&r.output)) {
    j["output"] = *s;
  } else {
    j["output"] = nullptr;
  }
  j["raw_reward"] = opt(r.raw_reward);
  j["advantage"] = opt(r.advantage);
  if (r.latency_ms) j["latency_ms"] = *r.latency_ms;
  j["generation_calls"] = r.generation_calls;
  j["reward_calls"] = r.reward_calls;
  j["acceptance_rate"] = opt(r.acceptance_rate);
  if (r.correct) j["correct"] = *r.correct;
  if (r.error) j["error"] = *r.error;
  auto trace = ordered_json::array();
  for (const auto& t : r.trace) {
    ordered_json e;
    e["step"] = t.step;
    e["cut"] = t.cut;
    e["reward"] = t.proposal_reward;
    e["advantage"] = t.proposal_advantage;
    e["accepted"] = t.accepted;
    e["alpha"] = t.alpha;
    trace.push_back(std::move(e));
  }
  j["trace"] = std::move(trace);
  return j.dump();
}

RunRecord record_from_json(std::string_view line) {
  try {
    const auto doc = nlohmann::json::parse(line);
    RunRecord r;
    r.prompt_id = doc.at("id").get<std::string>();
    r.method = doc.at("method").get<std::string>();
    r.config_tag = doc.value("config_tag", std::string{});
    if (doc.contains("output")) {
      const auto& out = doc["output"];
      if (out.is_array()) {
        r.output = out.get<TokenSeq>();
      } else if (out.is_string()) {
        r.output = out.get<std::string>();
      }
    }
    r.raw_reward = read_opt<double>(doc, "raw_reward");
    r.advantage = read_opt<double>(doc, "advantage");
    r.latency_ms = read_opt<double>(doc, "latency_ms");
    r.generation_calls = doc.value("generation_calls", std::size_t{0});
    r.reward_calls = doc.value("reward_calls", std::size_t{0});
    r.acceptance_rate = read_opt<double>(doc, "acceptance_rate");
    r.correct = read_opt<bool>(doc, "correct");
    r.error = read_opt<std::string>(doc, "error");
    if (doc.contains("trace")) {
      for (const auto& e : doc["trace"]) {
        r.trace.push_back({e.at("step").get<std::size_t>(), e.at("cut").get<std::size_t>(),
                           e.at("reward").get<double>(), e.at("advantage").get<double>(),
                           e.at("accepted").get<bool>(), e.at("alpha").get<double>()});
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputDomainError(std::string("malformed run record: ") + e.what());
  }
}

std::vector<RunRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputDomainError("cannot open records file " + path.string());
  std::vector<RunRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(record_from_json(line));
  }
  return records;
}

}  // namespace ebd::harness
