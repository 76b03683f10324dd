#include "dtrn/model_io.hpp"

#include <algorithm>
#include <cstdio>

#include "dtrn/ctc.hpp"
#include "dtrn/error.hpp"

namespace dtrn {

namespace {

void check_shape(const Tensor& tensor, const std::vector<std::size_t>& expected,
                 const std::string& name) {
  if (tensor.shape() != expected) {
    Tensor reference(expected);
    throw IoError("checkpoint tensor '" + name + "' has shape " + tensor.shape_string() +
                  ", expected " + reference.shape_string());
  }
}

}  // namespace

void add_cnn_tensors(ModelCheckpoint& checkpoint, const CnnParams& params) {
  const auto names = CnnParams::tensor_names();
  const auto tensors = params.tensors();
  for (std::size_t i = 0; i < names.size(); ++i) checkpoint.add(names[i], *tensors[i]);
}

CnnParams load_cnn_tensors(const ModelCheckpoint& checkpoint) {
  Rng dummy(0);
  CnnParams params = CnnParams::init(CnnConfig::canonical(), dummy);
  const auto names = CnnParams::tensor_names();
  const auto tensors = params.tensors();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Tensor& stored = checkpoint.get(names[i]);
    check_shape(stored, tensors[i]->shape(), names[i]);
    *tensors[i] = stored;
  }
  return params;
}

void add_rnn_tensors(ModelCheckpoint& checkpoint, const LstmParams& params) {
  const auto names = LstmParams::tensor_names();
  const auto tensors = params.tensors();
  for (std::size_t i = 0; i < names.size(); ++i) checkpoint.add(names[i], *tensors[i]);
}

LstmParams load_rnn_tensors(const ModelCheckpoint& checkpoint) {
  LstmParams params = LstmParams::zeros(LstmConfig::canonical());
  const auto names = LstmParams::tensor_names();
  const auto tensors = params.tensors();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Tensor& stored = checkpoint.get(names[i]);
    check_shape(stored, tensors[i]->shape(), names[i]);
    *tensors[i] = stored;
  }
  return params;
}

void warn_unknown_tensors(const ModelCheckpoint& checkpoint,
                          const std::vector<std::string>& known) {
  for (const std::string& name : checkpoint.names()) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      std::fprintf(stderr, "warning: ignoring unknown checkpoint tensor '%s'\n", name.c_str());
    }
  }
}

Recognizer Recognizer::load(const std::string& checkpoint_path) {
  const ModelCheckpoint checkpoint = ModelCheckpoint::load(checkpoint_path);
  std::vector<std::string> known = CnnParams::tensor_names();
  const auto rnn_names = LstmParams::tensor_names();
  known.insert(known.end(), rnn_names.begin(), rnn_names.end());
  warn_unknown_tensors(checkpoint, known);
  return Recognizer{load_cnn_tensors(checkpoint), load_rnn_tensors(checkpoint)};
}

PosteriorSequence Recognizer::posteriors(const WordImage& image) const {
  const FeatureSequence seq = normalize_columns(extract_sequence(cnn, image));
  return bilstm_forward(rnn, seq);
}

std::string Recognizer::recognize(const WordImage& image) const {
  return best_path_decode(posteriors(image));
}

}  // namespace dtrn
