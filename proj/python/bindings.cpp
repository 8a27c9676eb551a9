#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "zsvqa/errors.hpp"
#include "zsvqa/eval.hpp"
#include "zsvqa/pipeline.hpp"
#include "zsvqa/runner.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace zsvqa;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

HeadTokenPatchTensor to_tensor(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3) throw ShapeError("expected a [heads, tokens, patches] array");
  HeadTokenPatchTensor t(a.shape(0), a.shape(1), a.shape(2));
  std::copy(a.data(), a.data() + a.size(), t.values.begin());
  return t;
}

std::vector<ExemplarQA> to_exemplars(const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<ExemplarQA> out;
  for (const auto& [q, a] : pairs) {
    ExemplarQA e;
    e.question = q;
    e.answer = a;
    out.push_back(std::move(e));
  }
  return out;
}

// Enum-valued fields are exposed as their string names.
template <class E, E RunConfig::*Field>
void enum_property(py::class_<RunConfig>& cls, const char* name, E (*parse)(std::string_view)) {
  cls.def_property(
      name, [](const RunConfig& c) { return std::string(to_string(c.*Field)); },
      [parse](RunConfig& c, const std::string& v) { c.*Field = parse(v); });
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Zero-shot VQA pipeline: relevance, captions, exemplars, prompts and scoring";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base);
  py::register_exception<NumericError>(m, "NumericError", base);
  py::register_exception<ArgumentError>(m, "ArgumentError", base);
  py::register_exception<ModeError>(m, "ModeError", base);
  py::register_exception<DataError>(m, "DataError", base);
  py::register_exception<IoError>(m, "IoError", base);
  py::register_exception<BudgetError>(m, "BudgetError", base);
  auto backend = py::register_exception<BackendError>(m, "BackendError", base);
  py::register_exception<NetworkError>(m, "NetworkError", backend);
  py::register_exception<MalformedResponseError>(m, "MalformedResponseError", backend);
  py::register_exception<StageError>(m, "StageError", base);

  py::class_<RunConfig> cfg(m, "RunConfig");
  cfg.def(py::init<>())
      .def_readwrite("endpoint", &RunConfig::endpoint)
      .def_readwrite("timeout_ms", &RunConfig::timeout_ms)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("patches", &RunConfig::patches)
      .def_readwrite("captions", &RunConfig::captions)
      .def_readwrite("top_k", &RunConfig::top_k)
      .def_readwrite("threshold", &RunConfig::threshold)
      .def_readwrite("exemplar_count", &RunConfig::exemplar_count)
      .def_readwrite("caption_count", &RunConfig::caption_count)
      .def_readwrite("budget", &RunConfig::budget)
      .def_readwrite("max_new_tokens", &RunConfig::max_new_tokens)
      .def_readwrite("workers", &RunConfig::workers)
      .def_readwrite("out", &RunConfig::out)
      .def("validate", &RunConfig::validate)
      .def("hash", &RunConfig::hash)
      .def("to_dict", [](const RunConfig& c) { return to_py(c.semantic_json()); });
  enum_property<BackendKind, &RunConfig::backend>(cfg, "backend", backend_kind_from_string);
  enum_property<ClampMode, &RunConfig::clamp_mode>(cfg, "clamp_mode", clamp_mode_from_string);
  enum_property<PatchDraw, &RunConfig::patch_draw>(cfg, "patch_draw", patch_draw_from_string);
  enum_property<QuestionGenerator, &RunConfig::question_generator>(cfg, "question_generator",
                                                                   question_generator_from_string);
  enum_property<ExemplarStrategy, &RunConfig::question_strategy>(cfg, "question_strategy",
                                                                 exemplar_strategy_from_string);
  enum_property<CaptionStrategy, &RunConfig::caption_strategy>(cfg, "caption_strategy",
                                                               caption_strategy_from_string);
  enum_property<PromptLayout, &RunConfig::layout>(cfg, "layout", prompt_layout_from_string);

  m.def(
      "patch_relevance",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> attention,
         py::array_t<double, py::array::c_style | py::array::forcecast> gradient, const std::string& mode) {
        AttentionBundle b;
        b.attention = to_tensor(attention);
        b.gradient = to_tensor(gradient);
        return patch_relevance(b, clamp_mode_from_string(mode)).scores;
      },
      "attention"_a, "gradient"_a, "mode"_a = "relu_gradient",
      "Per-patch relevance from [heads, tokens, patches] attention and gradient arrays.");

  m.def(
      "softmax_rows",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> logits) {
        if (logits.ndim() != 2) throw ShapeError("expected a 2-d array");
        Matrix mat(logits.shape(0), logits.shape(1));
        std::copy(logits.data(), logits.data() + logits.size(), mat.values.begin());
        softmax_rows(mat);
        py::array_t<double> out({mat.rows, mat.cols});
        std::copy(mat.values.begin(), mat.values.end(), out.mutable_data());
        return out;
      },
      "logits"_a);

  m.def(
      "sample_patches",
      [](std::vector<double> scores, std::size_t count, std::uint64_t seed) {
        return sample_patches(PatchRelevanceMap{std::move(scores), ClampMode::relu_gradient}, count, seed);
      },
      "scores"_a, "count"_a, "seed"_a, "Distinct patch indices drawn proportionally to the scores.");

  m.def(
      "dedup",
      [](const std::vector<std::string>& texts) {
        std::vector<Caption> caps;
        for (const auto& t : texts) caps.push_back(Caption{t, 0.0, 0, {}});
        std::vector<std::string> out;
        for (const auto& c : dedup_substrings(std::move(caps))) out.push_back(c.text);
        return out;
      },
      "captions"_a, "Drops captions that are substrings of another caption.");

  m.def(
      "token_count", [](const std::string& text) { return HeuristicTokenCounter{}.token_count(text); },
      "text"_a);

  m.def(
      "assemble_prompt",
      [](std::vector<std::string> captions, const std::vector<std::pair<std::string, std::string>>& exemplars,
         const std::string& question, const std::string& layout, std::size_t budget) {
        const auto b = assemble_prompt(kInstruction, std::move(captions), to_exemplars(exemplars), question,
                                       prompt_layout_from_string(layout), HeuristicTokenCounter{}, budget);
        return py::dict("text"_a = b.text, "token_count"_a = b.token_count,
                        "trimmed_exemplars"_a = b.trimmed_exemplars, "trimmed_captions"_a = b.trimmed_captions,
                        "captions"_a = b.context_captions);
      },
      "captions"_a, "exemplars"_a, "question"_a, "layout"_a = "ccc_qaqaqa", "budget"_a = kDefaultTokenBudget);

  m.def("normalize_answer", [](const std::string& a) { return normalize_vqa_answer(a); }, "answer"_a);
  m.def(
      "vqa_score", [](const std::string& p, const std::vector<std::string>& gts) { return vqa_score(p, gts); },
      "prediction"_a, "ground_truths"_a);
  m.def(
      "answer_hit_rate",
      [](const std::vector<std::pair<std::string, std::string>>& exemplars, const std::vector<std::string>& gts) {
        return answer_hit_rate(to_exemplars(exemplars), gts);
      },
      "exemplars"_a, "ground_truths"_a);
  m.def(
      "answer_noise_rate",
      [](const std::string& section, const std::vector<std::string>& gts) {
        return answer_noise_rate(section, gts, HeuristicTokenCounter{});
      },
      "exemplar_section"_a, "ground_truths"_a);

  m.def(
      "answer",
      [](const std::string& image_path, const std::string& question, const RunConfig& config) {
        config.validate();
        const auto backends = make_backends(config);
        AnswerRun run;
        {
          py::gil_scoped_release release;
          run = answer_one(image_path, question, config, backends);
        }
        return py::make_tuple(run.answer, to_py(run.record));
      },
      "image_path"_a, "question"_a, "config"_a = RunConfig{}, "Returns (answer, record).");

  m.def(
      "evaluate_desk",
      [](const std::string& slice_path, const RunConfig& config, const std::string& manifest_path, bool resume) {
        config.validate();
        const auto samples = load_desk_slice(slice_path);
        const auto backends = make_backends(config);
        EvalOptions opts;
        opts.workers = config.workers;
        opts.manifest_path = manifest_path;
        opts.resume = resume;
        EvalResult result;
        {
          py::gil_scoped_release release;
          result = evaluate(samples, config, backends, opts);
        }
        return to_py(summary_json(result));
      },
      "slice_path"_a, "config"_a = RunConfig{}, "manifest_path"_a = "", "resume"_a = true,
      "Runs the pipeline over a desk slice and returns the summary.");
}
