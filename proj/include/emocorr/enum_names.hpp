#pragma once

#include <string>

#include "emocorr/losses.hpp"
#include "emocorr/model.hpp"

namespace emocorr {

// Wire names used by config files, CLI flags, and report rows.
std::string to_string(ModelKind k);
std::string to_string(MemoHead h);
std::string to_string(LocalGroup g);
std::string to_string(LossFamily f);
std::string to_string(WeightMode m);
std::string to_string(PriorChoice p);

ModelKind parse_model_kind(const std::string& s);
MemoHead parse_memo_head(const std::string& s);
LocalGroup parse_local_group(const std::string& s);
LossFamily parse_loss_family(const std::string& s);
WeightMode parse_weight_mode(const std::string& s);
PriorChoice parse_prior_choice(const std::string& s);

}  // namespace emocorr
