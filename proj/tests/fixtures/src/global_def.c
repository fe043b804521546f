int unused_counter = 0;
int g = 3;
