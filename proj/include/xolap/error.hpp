#pragma once

#include <stdexcept>
#include <string>

namespace xolap {

enum class Errc {
    XmlSyntax,        // malformed XML input
    ShapeViolation,   // well-formed XML that is not a valid data tree
    DomainViolation,  // value outside the declared domain / non-numeric measure
    QuerySyntax,      // malformed query text or inconsistent stage list
    UnknownName,      // dimension/level/measure name not in the schema
    UnknownLevel,     // grouping element names a level the schema lacks
    UnknownPath,      // predicate path that resolves to nothing
    NotNormalized,    // plain group-by asked to run over a complex hierarchy
    NonReaggregable,  // finalized average fed into a further roll-up stage
    InvalidConfig,    // bad generator/benchmark configuration
    ResultMismatch,   // engines disagree; benchmark refuses to report timings
    IoError,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::XmlSyntax: return "XmlSyntax";
        case Errc::ShapeViolation: return "ShapeViolation";
        case Errc::DomainViolation: return "DomainViolation";
        case Errc::QuerySyntax: return "QuerySyntax";
        case Errc::UnknownName: return "UnknownName";
        case Errc::UnknownLevel: return "UnknownLevel";
        case Errc::UnknownPath: return "UnknownPath";
        case Errc::NotNormalized: return "NotNormalized";
        case Errc::NonReaggregable: return "NonReaggregable";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::ResultMismatch: return "ResultMismatch";
        case Errc::IoError: return "IoError";
    }
    return "Error";
}

class Error : public std::runtime_error {
public:
    Errc code;
    Error(Errc c, const std::string& msg)
        : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code(c) {}
};

[[noreturn]] inline void raise(Errc c, const std::string& msg) { throw Error(c, msg); }

}  // namespace xolap
