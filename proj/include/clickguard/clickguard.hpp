#pragma once

// Umbrella header for the ClickGuard toolkit.

#include "clickguard/checkpoint.hpp"
#include "clickguard/corpus.hpp"
#include "clickguard/dumps.hpp"
#include "clickguard/error.hpp"
#include "clickguard/feats.hpp"
#include "clickguard/layers.hpp"
#include "clickguard/lexicon.hpp"
#include "clickguard/ssafb.hpp"
#include "clickguard/tensor.hpp"
#include "clickguard/textprep.hpp"
#include "clickguard/train.hpp"
#include "clickguard/trust.hpp"
#include "clickguard/util.hpp"
