#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gvic/engine.hpp"
#include "gvic/errors.hpp"
#include "gvic/util.hpp"

namespace gvic {

struct QuestionRecord {
  std::string question_id;
  std::string text;
  std::string source;
  std::string category;
};

enum class DatasetFormat { JsonlQuestionField, PlainLines, JsonlHhDialogue };

inline DatasetFormat dataset_format_from_string(const std::string& s) {
  if (s == "jsonl") return DatasetFormat::JsonlQuestionField;
  if (s == "lines") return DatasetFormat::PlainLines;
  if (s == "hh") return DatasetFormat::JsonlHhDialogue;
  throw InvalidConfigError("unknown dataset format: " + s +
                           " (expected jsonl|lines|hh)");
}

inline std::string question_id_for(const std::string& text) {
  return "q" + to_hex16(fnv1a64(text));
}

namespace detail {
// HH-RLHF style dialogues store the exchange in one string; the question is
// the first human turn.
inline std::string first_human_turn(const std::string& dialogue) {
  const std::string human = "Human:";
  const std::string assistant = "Assistant:";
  auto h = dialogue.find(human);
  if (h == std::string::npos) return "";
  h += human.size();
  auto a = dialogue.find(assistant, h);
  std::string turn =
      a == std::string::npos ? dialogue.substr(h) : dialogue.substr(h, a - h);
  // trim
  auto b = turn.find_first_not_of(" \t\r\n");
  auto e = turn.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return turn.substr(b, e - b + 1);
}
}  // namespace detail

/// Loads question records in file order, deduplicating by question text
/// (first occurrence wins). Parse failures report the 1-based line number.
inline std::vector<QuestionRecord> load_dataset(
    const std::filesystem::path& path, DatasetFormat format,
    std::vector<std::string>* duplicate_log = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path.string());
  std::vector<QuestionRecord> records;
  std::set<std::string> seen_text;
  std::string line;
  int line_no = 0;
  std::string source = path.filename().string();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    QuestionRecord rec;
    rec.source = source;
    if (format == DatasetFormat::PlainLines) {
      rec.text = line;
    } else {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const std::exception& e) {
        throw ParseError(line_no, e.what());
      }
      if (format == DatasetFormat::JsonlQuestionField) {
        if (!j.contains("question") || !j.at("question").is_string())
          throw ParseError(line_no, "missing string field \"question\"");
        rec.text = j.at("question").get<std::string>();
        if (j.contains("category") && j.at("category").is_string())
          rec.category = j.at("category").get<std::string>();
        if (j.contains("id") && j.at("id").is_string())
          rec.question_id = j.at("id").get<std::string>();
      } else {  // JsonlHhDialogue
        std::string dialogue;
        if (j.contains("chosen") && j.at("chosen").is_string())
          dialogue = j.at("chosen").get<std::string>();
        else if (j.contains("transcript") && j.at("transcript").is_string())
          dialogue = j.at("transcript").get<std::string>();
        else
          throw ParseError(line_no, "missing \"chosen\" dialogue field");
        rec.text = detail::first_human_turn(dialogue);
        if (rec.text.empty())
          throw ParseError(line_no, "no human turn found in dialogue");
      }
    }
    if (!seen_text.insert(rec.text).second) {
      if (duplicate_log)
        duplicate_log->push_back("line " + std::to_string(line_no) +
                                 ": duplicate question dropped");
      continue;
    }
    if (rec.question_id.empty()) rec.question_id = question_id_for(rec.text);
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw EmptyDatasetError("dataset is empty: " + path.string());
  return records;
}

/// Seeded uniform sample without replacement. Hand-rolled Fisher-Yates on a
/// splitmix64 stream so the draw is identical on every platform.
inline std::vector<QuestionRecord> sample_records(
    const std::vector<QuestionRecord>& records, int n, std::uint64_t seed) {
  if (n < 0 || static_cast<size_t>(n) > records.size())
    throw SampleTooLargeError("sample size " + std::to_string(n) +
                              " exceeds dataset size " +
                              std::to_string(records.size()));
  std::vector<size_t> idx(records.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::uint64_t h = splitmix64(seed ^ fnv1a64("sample"));
  for (int i = 0; i < n; ++i) {
    h = splitmix64(h);
    size_t j = i + static_cast<size_t>(h % (idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<QuestionRecord> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(records[idx[i]]);
  return out;
}

// --- run persistence --------------------------------------------------------

struct RunManifest {
  std::string run_id;
  std::string config_fingerprint;
  std::string dataset_name;
  std::uint64_t sample_seed = 0;
  int sample_size = 0;
  std::vector<std::string> sampled_ids;
  std::map<std::string, std::string> status;  // pending | done | failed
  std::string created_at;
  std::string updated_at;
};

inline void to_json(nlohmann::json& j, const RunManifest& m) {
  j = nlohmann::json{{"run_id", m.run_id},
                     {"config_fingerprint", m.config_fingerprint},
                     {"dataset_name", m.dataset_name},
                     {"sample_seed", m.sample_seed},
                     {"sample_size", m.sample_size},
                     {"sampled_ids", m.sampled_ids},
                     {"status", m.status},
                     {"created_at", m.created_at},
                     {"updated_at", m.updated_at}};
}
inline void from_json(const nlohmann::json& j, RunManifest& m) {
  j.at("run_id").get_to(m.run_id);
  j.at("config_fingerprint").get_to(m.config_fingerprint);
  j.at("dataset_name").get_to(m.dataset_name);
  j.at("sample_seed").get_to(m.sample_seed);
  j.at("sample_size").get_to(m.sample_size);
  j.at("sampled_ids").get_to(m.sampled_ids);
  j.at("status").get_to(m.status);
  j.at("created_at").get_to(m.created_at);
  j.at("updated_at").get_to(m.updated_at);
}

/// Data root for run directories; overridable via GVIC_DATA_ROOT.
inline std::filesystem::path data_root() {
  if (const char* env = std::getenv("GVIC_DATA_ROOT")) return env;
  return std::filesystem::current_path();
}

namespace detail {
// Write-to-temp then rename: readers never observe a partially written file
// under the final name.
inline void atomic_write(const std::filesystem::path& final_path,
                         const std::string& content) {
  auto tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
  }
}
}  // namespace detail

inline std::filesystem::path transcript_path(
    const std::filesystem::path& run_dir, const std::string& question_id) {
  return run_dir / (question_id + ".json");
}

/// Persists one transcript as a self-contained JSON document, atomically.
inline std::filesystem::path persist_transcript(
    const DebateTranscript& transcript, const std::filesystem::path& run_dir) {
  std::filesystem::create_directories(run_dir);
  auto path = transcript_path(run_dir, transcript.question_id);
  nlohmann::json j = transcript;
  detail::atomic_write(path, j.dump(2) + "\n");
  return path;
}

inline DebateTranscript load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transcript: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    return j.get<DebateTranscript>();
  } catch (const std::exception& e) {
    throw IoError("cannot parse transcript " + path.string() + ": " + e.what());
  }
}

inline void save_manifest(const RunManifest& manifest,
                          const std::filesystem::path& run_dir) {
  std::filesystem::create_directories(run_dir);
  nlohmann::json j = manifest;
  detail::atomic_write(run_dir / "manifest.json", j.dump(2) + "\n");
}

inline RunManifest load_manifest(const std::filesystem::path& run_dir) {
  auto path = run_dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw MissingRunError("no manifest at " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    return j.get<RunManifest>();
  } catch (const std::exception& e) {
    throw IoError("cannot parse manifest " + path.string() + ": " + e.what());
  }
}

/// Questions still to run, in sampled order. Refuses to resume when the
/// configuration fingerprint changed since the manifest was written.
inline std::vector<std::string> resume_pending(
    const RunManifest& manifest, const std::string& config_fingerprint) {
  if (manifest.config_fingerprint != config_fingerprint)
    throw FingerprintMismatchError(
        "run was started with fingerprint " + manifest.config_fingerprint +
        " but the current config is " + config_fingerprint);
  std::vector<std::string> pending;
  for (const auto& qid : manifest.sampled_ids) {
    auto it = manifest.status.find(qid);
    if (it == manifest.status.end() || it->second != "done")
      pending.push_back(qid);
  }
  return pending;
}

}  // namespace gvic
