#include "emocorr/enum_names.hpp"

#include "emocorr/errors.hpp"

namespace emocorr {

std::string to_string(ModelKind k) { return k == ModelKind::demux ? "demux" : "memo"; }

std::string to_string(MemoHead h) {
    return h == MemoHead::new_classifier ? "new-classifier" : "mlm-analog";
}

std::string to_string(LocalGroup g) {
    switch (g) {
        case LocalGroup::none: return "none";
        case LocalGroup::inter: return "inter";
        case LocalGroup::intra: return "intra";
        case LocalGroup::both: return "both";
    }
    return "none";
}

std::string to_string(LossFamily f) {
    return f == LossFamily::exp_predictions ? "exp-predictions" : "cosine-representations";
}

std::string to_string(WeightMode m) {
    return m == WeightMode::constant_one ? "constant-one" : "from-prior";
}

std::string to_string(PriorChoice p) {
    switch (p) {
        case PriorChoice::none: return "none";
        case PriorChoice::empirical_rho: return "empirical-rho";
        case PriorChoice::wheel_theta: return "wheel-theta";
    }
    return "none";
}

namespace {

[[noreturn]] void bad_value(const char* what, const std::string& s) {
    throw ConfigError(std::string("unknown ") + what + " '" + s + "'");
}

}  // namespace

ModelKind parse_model_kind(const std::string& s) {
    if (s == "demux") return ModelKind::demux;
    if (s == "memo") return ModelKind::memo;
    bad_value("model kind", s);
}

MemoHead parse_memo_head(const std::string& s) {
    if (s == "new-classifier") return MemoHead::new_classifier;
    if (s == "mlm-analog") return MemoHead::mlm_analog;
    bad_value("memo head", s);
}

LocalGroup parse_local_group(const std::string& s) {
    if (s == "none") return LocalGroup::none;
    if (s == "inter") return LocalGroup::inter;
    if (s == "intra") return LocalGroup::intra;
    if (s == "both") return LocalGroup::both;
    bad_value("local group", s);
}

LossFamily parse_loss_family(const std::string& s) {
    if (s == "exp-predictions") return LossFamily::exp_predictions;
    if (s == "cosine-representations") return LossFamily::cosine_representations;
    bad_value("loss family", s);
}

WeightMode parse_weight_mode(const std::string& s) {
    if (s == "constant-one") return WeightMode::constant_one;
    if (s == "from-prior") return WeightMode::from_prior;
    bad_value("weight mode", s);
}

PriorChoice parse_prior_choice(const std::string& s) {
    if (s == "none") return PriorChoice::none;
    if (s == "empirical-rho") return PriorChoice::empirical_rho;
    if (s == "wheel-theta") return PriorChoice::wheel_theta;
    bad_value("prior", s);
}

}  // namespace emocorr
