#pragma once

#include <string_view>

namespace clickguard {

enum class PosTag {
  kNoun,
  kVerb,
  kAdj,
  kAdv,
  kPronFirst,
  kPronSecond,
  kPronPossessive,
  kPronOther,
  kPrep,
  kDet,
  kPunct,
  kOther,
};

inline std::string_view pos_tag_name(PosTag t) {
  switch (t) {
    case PosTag::kNoun: return "NOUN";
    case PosTag::kVerb: return "VERB";
    case PosTag::kAdj: return "ADJ";
    case PosTag::kAdv: return "ADV";
    case PosTag::kPronFirst: return "PRON_1P";
    case PosTag::kPronSecond: return "PRON_2P";
    case PosTag::kPronPossessive: return "PRON_POSS";
    case PosTag::kPronOther: return "PRON_OTHER";
    case PosTag::kPrep: return "PREP";
    case PosTag::kDet: return "DET";
    case PosTag::kPunct: return "PUNCT";
    case PosTag::kOther: return "OTHER";
  }
  return "OTHER";
}

}  // namespace clickguard
