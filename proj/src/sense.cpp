#include "isgrid/sense.hpp"

#include <cmath>

namespace isgrid {

void CoilSet::validate() const {
  if (maps.empty()) throw std::invalid_argument("coil set needs at least one coil");
  for (const auto& m : maps)
    if (m.shape() != maps.front().shape()) throw ShapeError("coil maps disagree in shape");
}

std::vector<double> CoilSet::rss() const {
  validate();
  std::vector<double> out(maps.front().size(), 0.0);
  for (const auto& m : maps)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += std::norm(m[i]);
  for (double& v : out) v = std::sqrt(v);
  return out;
}

CoilSet CoilSet::unit(const Shape& shape) {
  ComplexGrid ones(shape);
  for (auto& v : ones.values()) v = 1.0;
  return CoilSet{{ones}};
}

NonrigidSenseOp::NonrigidSenseOp(std::shared_ptr<const ImageGridder> warp, std::shared_ptr<const CoilSet> coils,
                                 std::shared_ptr<const KSpaceGridder> gridder)
    : warp_(std::move(warp)), coils_(std::move(coils)), gridder_(std::move(gridder)) {
  if (!coils_ || !gridder_) throw std::invalid_argument("SENSE operator needs coils and a k-space gridder");
  coils_->validate();
  const Shape& n = gridder_->plan().grid_shape;
  if (coils_->shape() != n)
    throw ShapeError("coil map shape " + to_string(coils_->shape()) + " != gridder shape " + to_string(n));
  if (warp_ && warp_->shape() != n)
    throw ShapeError("warp field shape " + to_string(warp_->shape()) + " != gridder shape " + to_string(n));
}

CoilData NonrigidSenseOp::forward(const ComplexGrid& x) const {
  if (x.shape() != shape()) throw ShapeError("image " + to_string(x.shape()) + " != operator shape " + to_string(shape()));
  const ComplexGrid moved = warp_ ? warp_->forward(x) : x;
  CoilData out(coils_->count());
  ComplexGrid weighted(shape());
  for (std::size_t c = 0; c < coils_->count(); ++c) {
    const auto& s = coils_->maps[c];
    for (std::size_t i = 0; i < weighted.size(); ++i) weighted[i] = s[i] * moved[i];
    out[c] = gridder_->inverse(weighted);
  }
  return out;
}

ComplexGrid NonrigidSenseOp::adjoint(const CoilData& y) const {
  if (y.size() != coils_->count())
    throw ShapeError("data has " + std::to_string(y.size()) + " coils, operator has " +
                     std::to_string(coils_->count()));
  ComplexGrid acc(shape());
  for (std::size_t c = 0; c < coils_->count(); ++c) {
    if (y[c].size() != sample_count())
      throw ShapeError("coil block has " + std::to_string(y[c].size()) + " samples, trajectory has " +
                       std::to_string(sample_count()));
    const ComplexGrid img = gridder_->forward(y[c]);
    const auto& s = coils_->maps[c];
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::conj(s[i]) * img[i];
  }
  return warp_ ? warp_->adjoint(acc) : acc;
}

void StackedSenseModel::validate() const {
  if (states.empty()) throw std::invalid_argument("stacked model has no states");
  if (states.size() != data.size())
    throw ShapeError("stacked model has " + std::to_string(states.size()) + " states but " +
                     std::to_string(data.size()) + " data blocks");
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (states[j].shape() != shape()) throw ShapeError("stacked states disagree in grid shape");
    if (data[j].size() != states[j].coil_count()) throw ShapeError("data block coil count mismatch in state " + std::to_string(j));
    for (const auto& block : data[j])
      if (block.size() != states[j].sample_count())
        throw ShapeError("data block sample count mismatch in state " + std::to_string(j));
  }
}

std::size_t StackedSenseModel::total_samples() const {
  std::size_t n = 0;
  for (const auto& s : states) n += s.coil_count() * s.sample_count();
  return n;
}

std::vector<CoilData> stacked_forward(const StackedSenseModel& model, const ComplexGrid& x) {
  std::vector<CoilData> out;
  out.reserve(model.states.size());
  for (const auto& op : model.states) out.push_back(op.forward(x));
  return out;
}

ComplexGrid stacked_adjoint(const StackedSenseModel& model, const std::vector<CoilData>& blocks) {
  if (blocks.size() != model.states.size())
    throw ShapeError("got " + std::to_string(blocks.size()) + " data blocks for " +
                     std::to_string(model.states.size()) + " states");
  ComplexGrid acc(model.shape());
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const ComplexGrid part = model.states[j].adjoint(blocks[j]);
    axpy(1.0, part.data(), acc.data());
  }
  return acc;
}

std::vector<Complex> flatten(const std::vector<CoilData>& blocks) {
  std::vector<Complex> out;
  for (const auto& state : blocks)
    for (const auto& coil : state) out.insert(out.end(), coil.begin(), coil.end());
  return out;
}

std::vector<CoilData> unflatten(const StackedSenseModel& model, std::span<const Complex> flat) {
  if (flat.size() != model.total_samples())
    throw ShapeError("flat data has " + std::to_string(flat.size()) + " samples, model expects " +
                     std::to_string(model.total_samples()));
  std::vector<CoilData> out(model.states.size());
  std::size_t pos = 0;
  for (std::size_t j = 0; j < model.states.size(); ++j) {
    const auto n = model.states[j].sample_count();
    out[j].resize(model.states[j].coil_count());
    for (auto& coil : out[j]) {
      coil.assign(flat.begin() + static_cast<long>(pos), flat.begin() + static_cast<long>(pos + n));
      pos += n;
    }
  }
  return out;
}

}  // namespace isgrid
