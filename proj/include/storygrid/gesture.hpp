#pragma once

#include <cstdint>
#include <optional>

#include "storygrid/types.hpp"

namespace storygrid::gesture {

enum class Phase { placed, lifted };

std::string_view to_string(Phase phase);
std::optional<Phase> phase_from_string(std::string_view s);

struct TokenEvent {
  std::int64_t ts_ms = 0;
  TokenKind token = TokenKind::Mover;
  Phase phase = Phase::placed;
  CellCoord cell;

  friend bool operator==(const TokenEvent&, const TokenEvent&) = default;
};

// A gesture that reached its effect (or a sanctioned no-op). This is the unit
// counted by usage analytics.
struct CompletedOp {
  TokenKind token = TokenKind::Mover;
  std::int64_t ts_ms = 0;

  friend bool operator==(const CompletedOp&, const CompletedOp&) = default;
};

struct ConsumeResult {
  Outcome outcome;
  std::optional<CompletedOp> completed;
};

// Applies one token event to the board. Throws InvalidCell (board untouched)
// for an off-board cell; every other condition is reported as a Signal.
ConsumeResult consume(Board& board, const TokenEvent& event);

}  // namespace storygrid::gesture
