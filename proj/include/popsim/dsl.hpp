#pragma once

#include "popsim/protocol.hpp"

#include <string>
#include <string_view>

namespace popsim {

/// Parse the line-oriented protocol language:
///
///     # comment
///     protocol <name>                 optional
///     param <key> = <value>           optional, repeatable
///     states <name>+                  required, declares Q in index order
///     input <symbol> = <state>        optional, repeatable
///     output <state> = 0|1            required for every state
///     <A> <B> -> <C> <D>              rule for the ordered pair (A, B)
///     sym <A> <B> -> <C> <D>          also installs (B, A) -> (D, C)
///
/// Several `name = value` assignments may share one input/output line.
/// Pairs without a rule keep the identity transition. A second rule for an
/// ordered pair is an error, including one produced by `sym` expansion.
ProtocolSpec parse_protocol(std::string_view text);

/// Render a protocol so that parse_protocol(emit_protocol(p)) == p.
std::string emit_protocol(const ProtocolSpec& protocol);

} // namespace popsim
