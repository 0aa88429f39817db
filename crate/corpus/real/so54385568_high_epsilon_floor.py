# Recreation of Stack Overflow question 54385568: MountainCar agent whose
# exploration rate is clamped at 0.3, so it keeps acting randomly.
import random
from collections import deque

import gym
import numpy as np
from keras.models import Sequential
from keras.layers import Dense
from keras.optimizers import Adam

env = gym.make("MountainCar-v0")
state_size = env.observation_space.shape[0]
action_size = env.action_space.n

gamma = 0.99
epsilon = 1.0
epsilon_min = 0.3
epsilon_decay = 0.99
batch_size = 64
memory_size = 20000
memory = deque(maxlen=memory_size)


def create_model():
    model = Sequential()
    model.add(Dense(48, input_dim=state_size, activation="relu"))
    model.add(Dense(24, activation="relu"))
    model.add(Dense(action_size))
    model.compile(loss="mean_squared_error", optimizer=Adam(lr=0.005))
    return model


model = create_model()
target_model = create_model()


def act(state):
    if np.random.random() < epsilon:
        return env.action_space.sample()
    return np.argmax(model.predict(state)[0])


def target_train():
    target_model.set_weights(model.get_weights())


def replay():
    if len(memory) < batch_size:
        return
    samples = random.sample(memory, batch_size)
    for sample in samples:
        state, action, reward, new_state, finished = sample
        target = target_model.predict(state)
        if finished:
            target[0][action] = reward
        else:
            q_future = max(target_model.predict(new_state)[0])
            target[0][action] = reward + q_future * gamma
        model.fit(state, target, epochs=1, verbose=0)


total_steps = 0
for trial in range(1000):
    cur_state = env.reset().reshape(1, 2)
    for step in range(200):
        action = act(cur_state)
        new_state, reward, done, _ = env.step(action)
        new_state = new_state.reshape(1, 2)
        memory.append([cur_state, action, reward, new_state, done])
        replay()
        total_steps += 1
        if total_steps % 1000 == 0:
            target_train()
        cur_state = new_state
        if done:
            break
    epsilon = max(epsilon_min, epsilon * epsilon_decay)

env.close()
