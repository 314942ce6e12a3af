// Generated test driver. Runs the selected cases against the candidate
// classes and prints one verdict line per case.
import java.lang.reflect.*;
import java.util.*;

public class ReasontransDriver {
    static final String ENTRY = "{{entry_function}}";
    static final String[] CANDIDATE_CLASSES = { {{candidate_classes}} };
    static final boolean TOLERANT = {{tolerant}};
    static final double EPSILON = {{epsilon}};
    static Set<Integer> selected = new HashSet<>();

    // Minimal JSON reader producing Long, Double, Boolean, String, List, Map or null.
    static final class Json {
        final String text;
        int pos = 0;

        Json(String text) { this.text = text; }

        static Object parse(String text) {
            Json p = new Json(text);
            Object v = p.value();
            p.ws();
            if (p.pos != text.length()) throw new IllegalArgumentException("bad json: trailing characters");
            return v;
        }

        void ws() {
            while (pos < text.length() && Character.isWhitespace(text.charAt(pos))) pos++;
        }

        void expect(char c) {
            ws();
            if (pos >= text.length() || text.charAt(pos) != c)
                throw new IllegalArgumentException("bad json: expected " + c);
            pos++;
        }

        String string() {
            expect('"');
            StringBuilder out = new StringBuilder();
            while (text.charAt(pos) != '"') {
                char c = text.charAt(pos++);
                if (c != '\\') { out.append(c); continue; }
                char e = text.charAt(pos++);
                switch (e) {
                    case 'n': out.append('\n'); break;
                    case 't': out.append('\t'); break;
                    case 'r': out.append('\r'); break;
                    case 'b': out.append('\b'); break;
                    case 'f': out.append('\f'); break;
                    case 'u': out.append((char) Integer.parseInt(text.substring(pos, pos + 4), 16)); pos += 4; break;
                    default: out.append(e);
                }
            }
            pos++;
            return out.toString();
        }

        Object value() {
            ws();
            char c = text.charAt(pos);
            if (c == '{') {
                pos++;
                Map<String, Object> map = new LinkedHashMap<>();
                ws();
                if (text.charAt(pos) == '}') { pos++; return map; }
                while (true) {
                    ws();
                    String key = string();
                    expect(':');
                    map.put(key, value());
                    ws();
                    if (text.charAt(pos) == ',') { pos++; continue; }
                    expect('}');
                    return map;
                }
            }
            if (c == '[') {
                pos++;
                List<Object> list = new ArrayList<>();
                ws();
                if (text.charAt(pos) == ']') { pos++; return list; }
                while (true) {
                    list.add(value());
                    ws();
                    if (text.charAt(pos) == ',') { pos++; continue; }
                    expect(']');
                    return list;
                }
            }
            if (c == '"') return string();
            if (text.startsWith("true", pos)) { pos += 4; return Boolean.TRUE; }
            if (text.startsWith("false", pos)) { pos += 5; return Boolean.FALSE; }
            if (text.startsWith("null", pos)) { pos += 4; return null; }
            int start = pos;
            while (pos < text.length() && "+-0123456789.eE".indexOf(text.charAt(pos)) >= 0) pos++;
            String token = text.substring(start, pos);
            if (token.isEmpty()) throw new IllegalArgumentException("bad json: unexpected token");
            if (token.contains(".") || token.contains("e") || token.contains("E")) return Double.parseDouble(token);
            try {
                return Long.parseLong(token);
            } catch (NumberFormatException ex) {
                return Double.parseDouble(token);
            }
        }
    }

    static Object convert(Object json, Type type) {
        Class<?> raw = rawClass(type);
        if (raw == int.class || raw == Integer.class) return (int) asLong(json);
        if (raw == long.class || raw == Long.class) return asLong(json);
        if (raw == short.class || raw == Short.class) return (short) asLong(json);
        if (raw == byte.class || raw == Byte.class) return (byte) asLong(json);
        if (raw == double.class || raw == Double.class) return asDouble(json);
        if (raw == float.class || raw == Float.class) return (float) asDouble(json);
        if (raw == boolean.class || raw == Boolean.class) {
            if (json instanceof Boolean) return json;
            return asDouble(json) != 0.0;
        }
        if (raw == char.class || raw == Character.class) {
            if (json instanceof String && !((String) json).isEmpty()) return ((String) json).charAt(0);
            return (char) asLong(json);
        }
        if (raw == String.class) return json == null ? null : json.toString();
        if (raw.isArray()) {
            Class<?> component = raw.getComponentType();
            List<?> items = asList(json);
            Object array = Array.newInstance(component, items.size());
            for (int i = 0; i < items.size(); i++) Array.set(array, i, convert(items.get(i), component));
            return array;
        }
        if (List.class.isAssignableFrom(raw) || raw == Collection.class || raw == Iterable.class) {
            Type element = Object.class;
            if (type instanceof ParameterizedType) element = ((ParameterizedType) type).getActualTypeArguments()[0];
            List<Object> out = new ArrayList<>();
            for (Object item : asList(json)) out.add(convert(item, element));
            return out;
        }
        return json;
    }

    static Class<?> rawClass(Type type) {
        if (type instanceof Class) return (Class<?>) type;
        if (type instanceof ParameterizedType) return (Class<?>) ((ParameterizedType) type).getRawType();
        return Object.class;
    }

    static long asLong(Object json) {
        if (json instanceof Long) return (Long) json;
        if (json instanceof Double) return (long) (double) (Double) json;
        if (json instanceof Boolean) return ((Boolean) json) ? 1 : 0;
        if (json instanceof String && ((String) json).length() == 1) return ((String) json).charAt(0);
        throw new IllegalArgumentException("expected integer argument, got " + json);
    }

    static double asDouble(Object json) {
        if (json instanceof Number) return ((Number) json).doubleValue();
        if (json instanceof Boolean) return ((Boolean) json) ? 1.0 : 0.0;
        throw new IllegalArgumentException("expected numeric argument, got " + json);
    }

    static List<?> asList(Object json) {
        if (json instanceof List) return (List<?>) json;
        if (json instanceof String) {
            List<Object> chars = new ArrayList<>();
            for (char c : ((String) json).toCharArray()) chars.add(String.valueOf(c));
            return chars;
        }
        throw new IllegalArgumentException("expected array argument, got " + json);
    }

    // Normalizes a return value into the JSON object model.
    static Object normalize(Object value) {
        if (value == null) return null;
        if (value instanceof Character) return String.valueOf(value);
        if (value instanceof Double || value instanceof Float) return ((Number) value).doubleValue();
        if (value instanceof Number) return ((Number) value).longValue();
        if (value instanceof Boolean || value instanceof String) return value;
        if (value.getClass().isArray()) {
            List<Object> out = new ArrayList<>();
            for (int i = 0; i < Array.getLength(value); i++) out.add(normalize(Array.get(value, i)));
            return out;
        }
        if (value instanceof Iterable) {
            List<Object> out = new ArrayList<>();
            for (Object item : (Iterable<?>) value) out.add(normalize(item));
            return out;
        }
        if (value instanceof Map) {
            Map<String, Object> out = new LinkedHashMap<>();
            for (Map.Entry<?, ?> e : ((Map<?, ?>) value).entrySet()) out.put(String.valueOf(e.getKey()), normalize(e.getValue()));
            return out;
        }
        return value.toString();
    }

    static boolean equal(Object got, Object expected) {
        boolean gotNumeric = got instanceof Number || got instanceof Boolean;
        boolean expNumeric = expected instanceof Number || expected instanceof Boolean;
        if ((got instanceof Number || expected instanceof Number) && gotNumeric && expNumeric) {
            if (!TOLERANT && got instanceof Long && expected instanceof Long) return got.equals(expected);
            double a = asDouble(got);
            double b = asDouble(expected);
            if (!TOLERANT) return a == b;
            if (Double.isNaN(a) || Double.isNaN(b)) return Double.isNaN(a) && Double.isNaN(b);
            double diff = Math.abs(a - b);
            return diff <= EPSILON || diff <= EPSILON * Math.max(Math.abs(a), Math.abs(b));
        }
        if (got == null || expected == null) return got == expected;
        if (got instanceof List && expected instanceof List) {
            List<?> g = (List<?>) got;
            List<?> e = (List<?>) expected;
            if (g.size() != e.size()) return false;
            for (int i = 0; i < g.size(); i++) if (!equal(g.get(i), e.get(i))) return false;
            return true;
        }
        if (got instanceof Map && expected instanceof Map) {
            Map<?, ?> g = (Map<?, ?>) got;
            Map<?, ?> e = (Map<?, ?>) expected;
            if (!g.keySet().equals(e.keySet())) return false;
            for (Object k : g.keySet()) if (!equal(g.get(k), e.get(k))) return false;
            return true;
        }
        return got.equals(expected);
    }

    static String dump(Object value) {
        if (value == null) return "null";
        if (value instanceof String) return "\"" + ((String) value).replace("\\", "\\\\").replace("\"", "\\\"") + "\"";
        if (value instanceof List) {
            StringBuilder out = new StringBuilder("[");
            List<?> items = (List<?>) value;
            for (int i = 0; i < items.size(); i++) out.append(i == 0 ? "" : ", ").append(dump(items.get(i)));
            return out.append("]").toString();
        }
        return value.toString();
    }

    static String oneLine(Object text) {
        return String.valueOf(text).replace('\n', ' ').replace('\r', ' ');
    }

    static Object invokeEntry(List<?> args) throws Throwable {
        for (String className : CANDIDATE_CLASSES) {
            Class<?> cls;
            try {
                cls = Class.forName(className);
            } catch (ClassNotFoundException ex) {
                continue;
            }
            for (Method m : cls.getDeclaredMethods()) {
                if (!m.getName().equals(ENTRY) || m.getParameterCount() != args.size()) continue;
                Type[] types = m.getGenericParameterTypes();
                Object[] values = new Object[args.size()];
                for (int i = 0; i < values.length; i++) values[i] = convert(args.get(i), types[i]);
                m.setAccessible(true);
                Object target = null;
                if (!Modifier.isStatic(m.getModifiers())) {
                    Constructor<?> ctor = cls.getDeclaredConstructor();
                    ctor.setAccessible(true);
                    target = ctor.newInstance();
                }
                try {
                    return m.invoke(target, values);
                } catch (InvocationTargetException ex) {
                    throw ex.getCause();
                }
            }
        }
        throw new NoSuchMethodException("entry function " + ENTRY + " with " + args.size() + " parameters not found");
    }

    static void runCase(int index, String caseId, String argsJson, String expectedJson) {
        if (!selected.isEmpty() && !selected.contains(index)) return;
        System.out.println("\nREASONTRANS BEGIN " + caseId);
        System.out.flush();
        try {
            List<?> args = (List<?>) Json.parse(argsJson);
            Object expected = Json.parse(expectedJson);
            Object got = normalize(invokeEntry(args));
            if (equal(got, expected)) {
                System.out.println("\nREASONTRANS CASE " + caseId + " PASS");
            } else {
                System.out.println("\nREASONTRANS CASE " + caseId + " FAIL got=" + oneLine(dump(got)));
            }
        } catch (Throwable ex) {
            System.out.println("\nREASONTRANS CASE " + caseId + " ERROR " + ex.getClass().getSimpleName() + ": " + oneLine(ex.getMessage()));
        }
        System.out.flush();
    }

    public static void main(String[] argv) {
        for (String a : argv) selected.add(Integer.parseInt(a));
{{cases}}
    }
}
