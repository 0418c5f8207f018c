#include "storygrid/types.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "storygrid/error.hpp"

namespace storygrid {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::pair<Enum, std::string_view>, N>& table,
                           std::string_view s) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

template <typename Enum, std::size_t N>
std::string_view name_of(const std::array<std::pair<Enum, std::string_view>, N>& table,
                         Enum value) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "?";
}

constexpr std::array<std::pair<TokenKind, std::string_view>, 8> kTokenNames{{
    {TokenKind::Mover, "Mover"},
    {TokenKind::Resizer, "Resizer"},
    {TokenKind::Player1, "Player1"},
    {TokenKind::Player2, "Player2"},
    {TokenKind::Stopper, "Stopper"},
    {TokenKind::Undoer, "Undoer"},
    {TokenKind::Zoomer, "Zoomer"},
    {TokenKind::Eraser, "Eraser"},
}};

constexpr std::array<std::pair<SignalCode, std::string_view>, 10> kSignalNames{{
    {SignalCode::EmptyUndo, "EmptyUndo"},
    {SignalCode::NotOnObject, "NotOnObject"},
    {SignalCode::NotOnBorder, "NotOnBorder"},
    {SignalCode::NoSuchChannel, "NoSuchChannel"},
    {SignalCode::AlreadyPlaying, "AlreadyPlaying"},
    {SignalCode::NotPlaying, "NotPlaying"},
    {SignalCode::DestinationOutOfBounds, "DestinationOutOfBounds"},
    {SignalCode::InvalidResizeTarget, "InvalidResizeTarget"},
    {SignalCode::GestureCancelled, "GestureCancelled"},
    {SignalCode::OpCompleted, "OpCompleted"},
}};

constexpr std::array<std::pair<Edge, std::string_view>, 4> kEdgeNames{{
    {Edge::left, "left"},
    {Edge::right, "right"},
    {Edge::top, "top"},
    {Edge::bottom, "bottom"},
}};

constexpr std::array<std::pair<AvKind, std::string_view>, 2> kAvNames{{
    {AvKind::audio, "audio"},
    {AvKind::video, "video"},
}};

constexpr std::array<std::pair<ErrorCode, std::string_view>, 15> kErrorNames{{
    {ErrorCode::UnknownObject, "UnknownObject"},
    {ErrorCode::OutOfBounds, "OutOfBounds"},
    {ErrorCode::InvalidResize, "InvalidResize"},
    {ErrorCode::InvalidCell, "InvalidCell"},
    {ErrorCode::SyntaxError, "SyntaxError"},
    {ErrorCode::SchemaError, "SchemaError"},
    {ErrorCode::DuplicateId, "DuplicateId"},
    {ErrorCode::TooManyChannels, "TooManyChannels"},
    {ErrorCode::DanglingLayoutRef, "DanglingLayoutRef"},
    {ErrorCode::UnknownObjectInSnapshot, "UnknownObjectInSnapshot"},
    {ErrorCode::NonMonotonicTimestamp, "NonMonotonicTimestamp"},
    {ErrorCode::UnknownPoster, "UnknownPoster"},
    {ErrorCode::UnknownSession, "UnknownSession"},
    {ErrorCode::UnknownLayout, "UnknownLayout"},
    {ErrorCode::MalformedMessage, "MalformedMessage"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) { return name_of(kErrorNames, code); }
std::string_view to_string(AvKind kind) { return name_of(kAvNames, kind); }
std::string_view to_string(Edge edge) { return name_of(kEdgeNames, edge); }
std::string_view to_string(TokenKind kind) { return name_of(kTokenNames, kind); }
std::string_view to_string(SignalCode code) { return name_of(kSignalNames, code); }

std::string_view to_string(PlaybackAction action) {
  return action == PlaybackAction::start ? "start" : "stop";
}

std::string_view to_string(UndoKind kind) {
  switch (kind) {
    case UndoKind::move:
      return "move";
    case UndoKind::resize:
      return "resize";
    case UndoKind::erase:
      return "erase";
  }
  return "?";
}

std::optional<AvKind> av_kind_from_string(std::string_view s) { return lookup(kAvNames, s); }
std::optional<Edge> edge_from_string(std::string_view s) { return lookup(kEdgeNames, s); }
std::optional<TokenKind> token_from_string(std::string_view s) { return lookup(kTokenNames, s); }
std::optional<SignalCode> signal_from_string(std::string_view s) {
  return lookup(kSignalNames, s);
}

const ObjectSpec* Catalog::find(std::string_view id) const {
  auto it = std::find_if(objects.begin(), objects.end(),
                         [&](const ObjectSpec& spec) { return spec.id == id; });
  return it == objects.end() ? nullptr : &*it;
}

const MediaObject* Board::find(std::string_view id) const {
  auto it = objects.find(ObjectId(id));
  return it == objects.end() ? nullptr : &it->second;
}

MediaObject* Board::find(std::string_view id) {
  auto it = objects.find(ObjectId(id));
  return it == objects.end() ? nullptr : &it->second;
}

bool operator==(const Board& a, const Board& b) {
  if (a.catalog != b.catalog) {
    if (!a.catalog || !b.catalog || !(*a.catalog == *b.catalog)) return false;
  }
  return a.poster_id == b.poster_id && a.objects == b.objects && a.z_order == b.z_order &&
         a.undo_stack == b.undo_stack && a.pending == b.pending && a.presence == b.presence;
}

void Outcome::append(Outcome other) {
  for (auto& s : other.signals) signals.push_back(std::move(s));
  for (auto& c : other.commands) commands.push_back(std::move(c));
}

}  // namespace storygrid
