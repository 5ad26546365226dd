#pragma once

#include <stdexcept>
#include <string>

namespace compop {

/// Base class for everything the library throws on bad data or on queries a
/// finite window cannot answer. The `kind()` string is stable and appears in
/// CLI diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error("ParseError", m) {}
};
struct SchemaError : Error {
    explicit SchemaError(const std::string& m) : Error("SchemaError", m) {}
};
struct UnknownGenerator : Error {
    explicit UnknownGenerator(const std::string& m) : Error("UnknownGenerator", m) {}
};
struct UnknownExample : Error {
    explicit UnknownExample(const std::string& m) : Error("UnknownExample", m) {}
};
struct AnnotationError : Error {
    explicit AnnotationError(const std::string& m) : Error("AnnotationError", m) {}
};
struct NullAtomError : Error {
    explicit NullAtomError(const std::string& m) : Error("NullAtom", m) {}
};
struct SpaceMismatch : Error {
    explicit SpaceMismatch(const std::string& m) : Error("SpaceMismatch", m) {}
};
struct NotInDomain : Error {
    explicit NotInDomain(const std::string& m) : Error("NotInDomain", m) {}
};
struct NotInAdjointDomain : Error {
    explicit NotInAdjointDomain(const std::string& m) : Error("NotInAdjointDomain", m) {}
};
struct IncompleteClass : Error {
    explicit IncompleteClass(const std::string& m) : Error("IncompleteClass", m) {}
};
struct NotDenselyDefined : Error {
    explicit NotDenselyDefined(const std::string& m) : Error("NotDenselyDefined", m) {}
};
struct NotCertified : Error {
    explicit NotCertified(const std::string& m) : Error("NotCertified", m) {}
};
struct InconclusiveAtWindow : Error {
    explicit InconclusiveAtWindow(const std::string& m) : Error("InconclusiveAtWindow", m) {}
};
struct UsageError : Error {
    explicit UsageError(const std::string& m) : Error("UsageError", m) {}
};

/// Thrown when the coordinate image of a vector cannot be certified finitely
/// supported within the window. When the squared norm of the image is still
/// known exactly through the h-values, it is carried along as a string
/// ("p/q" or "inf") so callers can report it.
class IncompletePreimage : public Error {
public:
    explicit IncompletePreimage(const std::string& m, std::string norm_sq = "")
        : Error("IncompletePreimage", m), norm_sq_(std::move(norm_sq)) {}

    /// Exact squared norm of the would-be image, empty if unknown.
    const std::string& norm_sq() const { return norm_sq_; }

private:
    std::string norm_sq_;
};

}  // namespace compop
