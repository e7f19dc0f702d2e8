#pragma once

#include <json.hpp>
#include <stdexcept>

#include "qcoh/asymptotics.hpp"
#include "qcoh/coherence.hpp"
#include "qcoh/entropy.hpp"
#include "qcoh/linalg.hpp"
#include "qcoh/ns.hpp"
#include "qcoh/protocols.hpp"

namespace qcoh {

using json = nlohmann::json;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// {"rows", "cols", "data": [[re, im], ...]} in row-major order.
json to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

/// {"factors": [["B", 2], ...]}
json to_json(const SystemLayout& l);
SystemLayout layout_from_json(const json& j);

/// {"layout", "matrix"}; states may also be given as {"layout", "ket": [[re, im], ...]}.
json to_json(const DensityMatrix& rho);
DensityMatrix state_from_json(const json& j);
PureState pure_state_from_json(const json& j);

/// {"in", "out", "kraus": [matrix, ...]}
json to_json(const KrausChannel& ch);
KrausChannel channel_from_json(const json& j);

/// {"table": [...], "out": L}
json to_json(const HashFunction& f);
HashFunction hash_from_json(const json& j);

/// Sparse: {"nx", "ny", "entries": [[x, y, w], ...]} with zero weights omitted.
json to_json(const JointDistribution& p);
JointDistribution joint_from_json(const json& j);

json to_json(const ClassCertificate& c);
json to_json(const NPResult& r);
json to_json(const Theta& t);
json to_json(const EntropyReport& r);
json to_json(const DSecResult& r);
json to_json(const ExtractionOutcome& r);
json to_json(const HashSearchResult& r);
json to_json(const DistillerReport& r);
json to_json(const RelationsReport& r);
json to_json(const CurvePoint& p);

/// Parses text, mapping syntax errors to ParseError.
json parse_json(const std::string& text);

}  // namespace qcoh
