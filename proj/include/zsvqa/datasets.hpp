#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "zsvqa/adapters.hpp"

namespace zsvqa {

struct VQASample {
  std::string image_id;
  std::string question_id;
  std::string question;
  std::vector<std::string> answers;  // annotator answers or direct answers
  std::string image_path;
  std::string image_payload;  // inline image data (desk slices); empty = read image_path
};

enum class DatasetKind { vqav2, okvqa, aokvqa, desk };

DatasetKind dataset_kind_from_string(std::string_view name);
std::string_view to_string(DatasetKind kind);

struct DatasetSource {
  DatasetKind kind = DatasetKind::desk;
  std::string split = "val2014";
  std::string questions_path;    // VQAv2 / OK-VQA questions JSON; A-OKVQA or desk file
  std::string annotations_path;  // VQAv2 / OK-VQA annotations JSON
  std::string images_dir;
};

// VQAv2 and OK-VQA share the official layout: a questions file with
// {"questions": [{image_id, question, question_id}]} and an annotations file
// with {"annotations": [{question_id, answers: [{answer}]}]}. Images resolve
// to <images_dir>/COCO_<split>_<12-digit id>.jpg.
std::vector<VQASample> load_vqa_official(const std::string& questions_path,
                                         const std::string& annotations_path,
                                         const std::string& images_dir, const std::string& split);

// A-OKVQA: one JSON list of {question_id, image_id, question, direct_answers}.
// Images resolve to <images_dir>/<12-digit id>.jpg.
std::vector<VQASample> load_aokvqa(const std::string& path, const std::string& images_dir);

// Desk slice: {"name", "samples": [{image_id, question_id, question, answers,
// scene}]} where `scene` is carried inline as the image payload.
std::vector<VQASample> load_desk_slice(const std::string& path);

std::vector<VQASample> load_dataset(const DatasetSource& source);

// Reads the image bytes (or takes the inline payload). Throws IoError.
Image load_image(const VQASample& sample);
Image load_image_file(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace zsvqa
