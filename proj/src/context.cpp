#include "ttclab/context.hpp"

namespace ttclab {

const char* to_string(ContextTag tag) {
  switch (tag) {
    case ContextTag::Evolving: return "evolving";
    case ContextTag::Reference: return "reference";
    case ContextTag::SinkAugmented: return "sink";
  }
  return "?";
}

ChunkContext::ChunkContext(int window_size) : window_size_(window_size) {
  if (window_size <= 0) throw std::invalid_argument("context: window size must be positive");
}

void ChunkContext::push(const Vec& chunk) {
  if (!reference_) reference_ = chunk;  // frozen at chunk 0, never updated again
  window_.push_back(chunk);
  if (static_cast<int>(window_.size()) > window_size_) window_.erase(window_.begin());
}

const Vec& ChunkContext::latest() const {
  if (window_.empty()) throw std::logic_error("context: empty window");
  return window_.back();
}

const Vec& ChunkContext::reference() const {
  if (!reference_) throw std::logic_error("context: reference not set");
  return *reference_;
}

}  // namespace ttclab
