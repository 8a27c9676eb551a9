#include "zsvqa/datasets.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <unordered_map>

#include "zsvqa/errors.hpp"
#include "zsvqa/text.hpp"

namespace zsvqa {

using json = nlohmann::json;

DatasetKind dataset_kind_from_string(std::string_view name) {
  if (name == "vqav2") return DatasetKind::vqav2;
  if (name == "okvqa") return DatasetKind::okvqa;
  if (name == "aokvqa") return DatasetKind::aokvqa;
  if (name == "desk") return DatasetKind::desk;
  throw ArgumentError("unknown dataset '" + std::string(name) + "' (vqav2|okvqa|aokvqa|desk)");
}

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::vqav2:
      return "vqav2";
    case DatasetKind::okvqa:
      return "okvqa";
    case DatasetKind::aokvqa:
      return "aokvqa";
    case DatasetKind::desk:
      return "desk";
  }
  return "desk";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return ss.str();
}

namespace {

json read_json(const std::string& path) {
  const std::string body = read_file(path);
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw DataError("'" + path + "' is not valid JSON");
  return doc;
}

std::string id_string(const json& v, const char* field) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw DataError(std::string("field '") + field + "' must be a string or integer id");
}

const json& require(const json& obj, const char* field) {
  if (!obj.is_object() || !obj.contains(field)) {
    throw DataError(std::string("missing field '") + field + "'");
  }
  return obj.at(field);
}

std::string padded_id(const std::string& id) {
  std::ostringstream ss;
  ss << std::setw(12) << std::setfill('0') << id;
  return ss.str();
}

void check_sample(const VQASample& s) {
  if (text::trim(s.question).empty()) {
    throw DataError("question " + s.question_id + " has empty text");
  }
  if (s.answers.empty()) throw DataError("question " + s.question_id + " has no ground-truth answers");
}

}  // namespace

std::vector<VQASample> load_vqa_official(const std::string& questions_path,
                                         const std::string& annotations_path,
                                         const std::string& images_dir, const std::string& split) {
  const json questions = read_json(questions_path);
  const json annotations = read_json(annotations_path);

  std::unordered_map<std::string, std::vector<std::string>> answers_by_qid;
  for (const auto& ann : require(annotations, "annotations")) {
    std::vector<std::string> answers;
    for (const auto& a : require(ann, "answers")) answers.push_back(require(a, "answer").get<std::string>());
    answers_by_qid[id_string(require(ann, "question_id"), "question_id")] = std::move(answers);
  }

  std::vector<VQASample> out;
  for (const auto& q : require(questions, "questions")) {
    VQASample s;
    s.question_id = id_string(require(q, "question_id"), "question_id");
    s.image_id = id_string(require(q, "image_id"), "image_id");
    s.question = require(q, "question").get<std::string>();
    auto it = answers_by_qid.find(s.question_id);
    if (it == answers_by_qid.end()) {
      throw DataError("question " + s.question_id + " has no annotation entry");
    }
    s.answers = it->second;
    s.image_path = (std::filesystem::path(images_dir) /
                    ("COCO_" + split + "_" + padded_id(s.image_id) + ".jpg"))
                       .string();
    check_sample(s);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<VQASample> load_aokvqa(const std::string& path, const std::string& images_dir) {
  const json doc = read_json(path);
  if (!doc.is_array()) throw DataError("A-OKVQA file must hold a JSON list");
  std::vector<VQASample> out;
  for (const auto& q : doc) {
    VQASample s;
    s.question_id = id_string(require(q, "question_id"), "question_id");
    s.image_id = id_string(require(q, "image_id"), "image_id");
    s.question = require(q, "question").get<std::string>();
    for (const auto& a : require(q, "direct_answers")) s.answers.push_back(a.get<std::string>());
    s.image_path = (std::filesystem::path(images_dir) / (padded_id(s.image_id) + ".jpg")).string();
    check_sample(s);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<VQASample> load_desk_slice(const std::string& path) {
  const json doc = read_json(path);
  std::vector<VQASample> out;
  for (const auto& q : require(doc, "samples")) {
    VQASample s;
    s.question_id = id_string(require(q, "question_id"), "question_id");
    s.image_id = id_string(require(q, "image_id"), "image_id");
    s.question = require(q, "question").get<std::string>();
    for (const auto& a : require(q, "answers")) s.answers.push_back(a.get<std::string>());
    s.image_path = path + "#" + s.image_id;
    s.image_payload = require(q, "scene").dump();
    check_sample(s);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<VQASample> load_dataset(const DatasetSource& source) {
  switch (source.kind) {
    case DatasetKind::vqav2:
    case DatasetKind::okvqa:
      return load_vqa_official(source.questions_path, source.annotations_path, source.images_dir,
                               source.split);
    case DatasetKind::aokvqa:
      return load_aokvqa(source.questions_path, source.images_dir);
    case DatasetKind::desk:
      return load_desk_slice(source.questions_path);
  }
  throw ArgumentError("unsupported dataset kind");
}

Image load_image_file(const std::string& path) {
  Image img;
  img.path = path;
  img.id = std::filesystem::path(path).stem().string();
  img.payload = read_file(path);
  return img;
}

Image load_image(const VQASample& sample) {
  Image img;
  img.id = sample.image_id;
  img.path = sample.image_path;
  img.payload = sample.image_payload.empty() ? read_file(sample.image_path) : sample.image_payload;
  return img;
}

}  // namespace zsvqa
