#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gbrff/boosting.hpp"
#include "gbrff/pbrff.hpp"

namespace gbrff {

// Self-describing structured text model files. Floating point values are
// written as hex-floats so round-trips are lossless at full precision.

namespace detail {

inline std::string fmt_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

inline double parse_double(const std::string& tok) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw std::runtime_error("model parse error: bad numeric token '" + tok + "'");
    return v;
}

inline std::string expect(std::istream& in, const std::string& field) {
    std::string tok;
    if (!(in >> tok) || tok != field)
        throw std::runtime_error("model parse error: expected field '" + field + "', got '" +
                                 tok + "'");
    return tok;
}

inline double read_double(std::istream& in) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("model parse error: truncated file");
    return parse_double(tok);
}

inline long long read_int(std::istream& in) {
    long long v;
    if (!(in >> v)) throw std::runtime_error("model parse error: truncated file");
    return v;
}

// seeds use the full 64-bit unsigned range, beyond what read_int accepts
inline std::uint64_t read_uint(std::istream& in) {
    std::uint64_t v;
    if (!(in >> v)) throw std::runtime_error("model parse error: truncated file");
    return v;
}

inline void write_vector(std::ostream& out, const std::string& field, const Vector& v) {
    out << field << ' ' << v.size();
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << fmt_double(v[i]);
    out << '\n';
}

inline Vector read_vector(std::istream& in, const std::string& field) {
    expect(in, field);
    const auto size = static_cast<Eigen::Index>(read_int(in));
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) v[i] = read_double(in);
    return v;
}

inline void write_rff(std::ostream& out, const RffSet& rff) {
    out << "seed " << rff.seed << '\n';
    out << "omegas " << rff.k() << ' ' << rff.dim() << '\n';
    for (Eigen::Index i = 0; i < rff.k(); ++i) {
        for (Eigen::Index j = 0; j < rff.dim(); ++j)
            out << (j ? " " : "") << fmt_double(rff.omegas(i, j));
        out << '\n';
    }
}

inline RffSet read_rff(std::istream& in) {
    RffSet rff;
    expect(in, "seed");
    rff.seed = read_uint(in);
    expect(in, "omegas");
    const auto k = static_cast<Eigen::Index>(read_int(in));
    const auto d = static_cast<Eigen::Index>(read_int(in));
    rff.omegas.resize(k, d);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < d; ++j) rff.omegas(i, j) = read_double(in);
    return rff;
}

}  // namespace detail

inline void save_ensemble(const Ensemble& ens, std::ostream& out) {
    out << "gbrff-model-v1\n";
    out << "h0 " << detail::fmt_double(ens.h0) << '\n';
    out << "v " << detail::fmt_double(ens.v) << '\n';
    out << "skipped " << ens.skipped_rounds << '\n';
    out << "rounds " << ens.rounds.size() << '\n';
    for (std::size_t t = 0; t < ens.rounds.size(); ++t) {
        const auto& r = ens.rounds[t];
        out << "round " << t << '\n';
        out << "alpha " << detail::fmt_double(r.alpha) << '\n';
        detail::write_vector(out, "landmark", r.learner.landmark);
        detail::write_rff(out, r.learner.rff);
        detail::write_vector(out, "q", r.learner.q.q);
    }
}

inline Ensemble load_ensemble(std::istream& in) {
    std::string tag;
    if (!(in >> tag) || tag != "gbrff-model-v1")
        throw std::runtime_error("model parse error: expected tag gbrff-model-v1");
    Ensemble ens;
    detail::expect(in, "h0");
    ens.h0 = detail::read_double(in);
    detail::expect(in, "v");
    ens.v = detail::read_double(in);
    detail::expect(in, "skipped");
    ens.skipped_rounds = static_cast<int>(detail::read_int(in));
    detail::expect(in, "rounds");
    const auto count = detail::read_int(in);
    for (long long t = 0; t < count; ++t) {
        detail::expect(in, "round");
        detail::read_int(in);
        BoostingRound round;
        detail::expect(in, "alpha");
        round.alpha = detail::read_double(in);
        round.learner.landmark = detail::read_vector(in, "landmark");
        round.learner.rff = detail::read_rff(in);
        round.learner.q.q = detail::read_vector(in, "q");
        ens.rounds.push_back(std::move(round));
    }
    return ens;
}

inline void save_pbrff(const PbrffModel& model, std::ostream& out) {
    out << "pbrff-model-v1\n";
    out << "landmarks " << model.landmarks.size() << '\n';
    for (std::size_t t = 0; t < model.landmarks.size(); ++t) {
        out << "landmark " << t << '\n';
        out << "label " << detail::fmt_double(model.landmarks[t].label) << '\n';
        detail::write_vector(out, "point", model.landmarks[t].point);
        detail::write_rff(out, model.per_landmark[t].rff);
        detail::write_vector(out, "q", model.per_landmark[t].q.q);
    }
    detail::write_vector(out, "weights", model.linear.weights);
    out << "bias " << detail::fmt_double(model.linear.bias) << '\n';
}

inline PbrffModel load_pbrff(std::istream& in) {
    std::string tag;
    if (!(in >> tag) || tag != "pbrff-model-v1")
        throw std::runtime_error("model parse error: expected tag pbrff-model-v1");
    PbrffModel model;
    detail::expect(in, "landmarks");
    const auto count = detail::read_int(in);
    for (long long t = 0; t < count; ++t) {
        detail::expect(in, "landmark");
        detail::read_int(in);
        LabeledLandmark lm;
        detail::expect(in, "label");
        lm.label = detail::read_double(in);
        lm.point = detail::read_vector(in, "point");
        LandmarkKernel k;
        k.rff = detail::read_rff(in);
        k.q.q = detail::read_vector(in, "q");
        model.landmarks.push_back(std::move(lm));
        model.per_landmark.push_back(std::move(k));
    }
    model.linear.weights = detail::read_vector(in, "weights");
    detail::expect(in, "bias");
    model.linear.bias = detail::read_double(in);
    return model;
}

inline void save_scaler(const Scaler& s, std::ostream& out) {
    out << "gbrff-scaler-v1\n";
    detail::write_vector(out, "mean", s.mean);
    detail::write_vector(out, "scale", s.scale);
    out << "constant " << s.constant.size();
    for (bool c : s.constant) out << ' ' << (c ? 1 : 0);
    out << '\n';
}

inline Scaler load_scaler(std::istream& in) {
    std::string tag;
    if (!(in >> tag) || tag != "gbrff-scaler-v1")
        throw std::runtime_error("model parse error: expected tag gbrff-scaler-v1");
    Scaler s;
    s.mean = detail::read_vector(in, "mean");
    s.scale = detail::read_vector(in, "scale");
    detail::expect(in, "constant");
    const auto count = detail::read_int(in);
    s.constant.resize(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) s.constant[static_cast<std::size_t>(i)] = detail::read_int(in) != 0;
    return s;
}

template <typename Saver, typename ModelT>
inline void save_to_file(const ModelT& model, const std::string& path, Saver saver) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
    saver(model, out);
    if (!out) throw std::runtime_error("write failure on model file: " + path);
}

inline void save_ensemble_file(const Ensemble& ens, const std::string& path) {
    save_to_file(ens, path, [](const Ensemble& m, std::ostream& o) { save_ensemble(m, o); });
}

inline Ensemble load_ensemble_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    return load_ensemble(in);
}

inline void save_pbrff_file(const PbrffModel& model, const std::string& path) {
    save_to_file(model, path, [](const PbrffModel& m, std::ostream& o) { save_pbrff(m, o); });
}

inline PbrffModel load_pbrff_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    return load_pbrff(in);
}

}  // namespace gbrff
