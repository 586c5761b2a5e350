#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace racas {

// Every failure the library surfaces derives from Error so callers (the
// runner in particular) can catch one type and record it in the step log.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MissingFile : public Error {
public:
    explicit MissingFile(const std::string& path)
        : Error("missing or unreadable file: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class SchemaViolation : public Error {
public:
    SchemaViolation(std::string field, const std::string& what)
        : Error("schema violation at '" + field + "': " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class DuplicateActionName : public Error {
public:
    explicit DuplicateActionName(const std::string& name)
        : Error("duplicate action name: " + name), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class UnknownAction : public Error {
public:
    UnknownAction(std::string name, std::vector<std::string> admissible);
    const std::string& name() const noexcept { return name_; }
    const std::vector<std::string>& admissible() const noexcept { return admissible_; }

private:
    std::string name_;
    std::vector<std::string> admissible_;
};

class BackendUnavailable : public Error {
public:
    using Error::Error;
};

class ReplayMiss : public Error {
public:
    explicit ReplayMiss(const std::string& digest)
        : Error("no recorded response for request digest " + digest), digest_(digest) {}
    const std::string& digest() const noexcept { return digest_; }

private:
    std::string digest_;
};

class NoRuleMatched : public Error {
public:
    using Error::Error;
};

class IoFailure : public Error {
public:
    using Error::Error;
};

class QueryParseFailure : public Error {
public:
    using Error::Error;
};

class ActionParseFailure : public Error {
public:
    using Error::Error;
};

class InvalidTarget : public Error {
public:
    using Error::Error;
};

class Unreachable : public Error {
public:
    using Error::Error;
};

class ActionOnFinishedEpisode : public Error {
public:
    ActionOnFinishedEpisode() : Error("action on a finished blackjack episode") {}
};

class InconsistentOutcome : public Error {
public:
    using Error::Error;
};

}  // namespace racas
