#include <stdio.h>
#include <string.h>

static char line[128];

int main(void) {
  char buf[512] = {0};
  size_t n = fread(buf, 1, sizeof(buf) - 1, stdin);
  size_t i = 0;
  while (i < n) {
    size_t len = 0;
    while (i < n && buf[i] != '\n' && len < sizeof(line) - 1)
      line[len++] = buf[i++];
    line[len] = 0;
    i++;
    char *eq = strchr(line, '=');
    if (eq == NULL)
      continue;
    *eq = 0;
    const char *key = line;
    const char *val = eq + 1;
    if (strcmp(key, "mode") == 0) {
      if (strcmp(val, "debug") == 0)
        puts("debug mode");
    } else if (strcmp(key, "name") == 0) {
      printf("hello %s\n", val);
    }
  }
  return 0;
}
