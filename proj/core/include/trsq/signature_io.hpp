#pragma once

// Signature artifacts. JSON schema:
//   {"n": <int>, "ell": <int>, "delta": <double>,
//    "entries": [{"i": <int>, "w": "<pattern>", "p": <double>}, ...]}
// CSV: header "i,w,p", one row per (start, pattern).
// Entries are ordered by start, then pattern index; writers are
// byte-deterministic for identical inputs.

#include <string>
#include <string_view>

#include "trsq/channel.hpp"

namespace trsq {

std::string signature_to_json(const SubwordSignature& sig);
SubwordSignature signature_from_json(std::string_view text);

std::string signature_to_csv(const SubwordSignature& sig);
SubwordSignature signature_from_csv(std::string_view text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace trsq
